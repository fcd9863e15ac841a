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

void saxpy(int n, float a, const float *x, float *y);

static float x[N];
static float y[N];

int main(void)
{
    for (int i = 0; i < N; i++) {
        x[i] = (float)(i % 10) / 10.0f;
        y[i] = (float)((i * 3) % 7) / 7.0f;
    }

    saxpy(N, 2.5f, x, y);

    double sum = emit(y, N);
    printf("%.6f\n", sum / N);
    return 0;
}
