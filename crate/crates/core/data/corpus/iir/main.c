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

#define N 64

void iir(int n, const float *x, float *y, const float *b, const float *a);

static float x[N];
static float y[N];
static const float b[3] = {0.2f, 0.3f, 0.2f};
static const float a[3] = {1.0f, -0.5f, 0.25f};

int main(void)
{
    for (int i = 0; i < N; i++)
        x[i] = (float)((i * 5) % 12) / 6.0f - 1.0f;

    iir(N, x, y, b, a);

    double sum = emit(y, N);
    printf("%.6f\n", sum / N);
    return 0;
}
