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

#define M 12
#define N 10

void trmm(int m, int n, float alpha, const float *A, float *B);

static float A[M * M];
static float B[M * N];

int main(void)
{
    for (int i = 0; i < M; i++)
        for (int j = 0; j < M; j++)
            A[i * M + j] = (float)((i + j) % M) / M;
    for (int i = 0; i < M; i++)
        for (int j = 0; j < N; j++)
            B[i * N + j] = (float)((N + i - j) % N) / N;

    trmm(M, N, 0.5f, A, B);

    double sum = emit(B, M * N);
    printf("%.6f\n", sum / (M * N));
    return 0;
}
