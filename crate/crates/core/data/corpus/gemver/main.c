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

void gemver(int n, float alpha, float beta, float *A,
            const float *u1, const float *v1, const float *u2, const float *v2,
            float *w, float *x, const float *y, const float *z);

static float A[N * N];
static float u1[N], v1[N], u2[N], v2[N], w[N], x[N], y[N], z[N];

int main(void)
{
    for (int i = 0; i < N; i++) {
        float fi = (float)(i + 1) / N;
        u1[i] = (float)i / N;
        u2[i] = fi / 2.0f;
        v1[i] = fi / 4.0f;
        v2[i] = fi / 6.0f;
        y[i] = fi / 8.0f;
        z[i] = fi / 9.0f;
        x[i] = 0.0f;
        w[i] = 0.0f;
        for (int j = 0; j < N; j++)
            A[i * N + j] = (float)((i * j) % N) / N;
    }

    gemver(N, 0.5f, 0.25f, A, u1, v1, u2, v2, w, x, y, z);

    double sum = emit(w, N);
    sum += emit(x, N);
    printf("%.6f\n", sum / (2 * N));
    return 0;
}
