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

#define N 16

void gesummv(int n, float alpha, float beta, const float *A, const float *B,
             float *tmp, const float *x, float *y);

static float A[N * N], B[N * N];
static float tmp[N], x[N], y[N];

int main(void)
{
    for (int i = 0; i < N; i++) {
        x[i] = (float)(i % N) / N;
        for (int j = 0; j < N; j++) {
            A[i * N + j] = (float)((i * j + 1) % N) / N;
            B[i * N + j] = (float)((i * j + 2) % N) / N;
        }
    }

    gesummv(N, 0.5f, 0.75f, A, B, tmp, x, y);

    double sum = emit(y, N);
    printf("%.6f\n", sum / N);
    return 0;
}
