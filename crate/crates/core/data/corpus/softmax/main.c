#include <stdio.h>

static double emit(const float *v, int n)
{
    double sum = 0.0;
    for (int i = 0; i < n; i++) {
        printf("%.6f\n", (double)v[i]);
        sum += v[i];
    }
    return sum;
}

#define N 32

void softmax(int n, const float *in, float *out);

static float in[N];
static float out[N];

int main(void)
{
    for (int i = 0; i < N; i++)
        in[i] = (float)((i * 7) % 11) / 4.0f - 1.0f;

    softmax(N, in, out);

    double sum = emit(out, N);
    printf("%.6f\n", sum / N);
    return 0;
}
