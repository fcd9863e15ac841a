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

void mvt(int n, float *x1, float *x2, const float *y1, const float *y2, const float *A);

static float A[N * N];
static float x1[N], x2[N], y1[N], y2[N];

int main(void)
{
    for (int i = 0; i < N; i++) {
        x1[i] = (float)(i % N) / N;
        x2[i] = (float)((i + 1) % N) / N;
        y1[i] = (float)((i + 3) % N) / N;
        y2[i] = (float)((i + 4) % N) / N;
        for (int j = 0; j < N; j++)
            A[i * N + j] = (float)(i * j % N) / N;
    }

    mvt(N, x1, x2, y1, y2, A);

    double sum = emit(x1, N);
    sum += emit(x2, N);
    printf("%.6f\n", sum / (2 * N));
    return 0;
}
