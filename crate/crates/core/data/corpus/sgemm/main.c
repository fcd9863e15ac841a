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
#define N 12
#define K 12

void sgemm(int m, int n, int k, float alpha, const float *A, const float *B,
           float beta, float *C);

static float A[M * K], B[K * N], C[M * N];

int main(void)
{
    for (int i = 0; i < M; i++)
        for (int p = 0; p < K; p++)
            A[i * K + p] = (float)((i * (p + 1)) % K) / K;
    for (int p = 0; p < K; p++)
        for (int j = 0; j < N; j++)
            B[p * N + j] = (float)((p * (j + 2)) % N) / N;
    for (int i = 0; i < M; i++)
        for (int j = 0; j < N; j++)
            C[i * N + j] = (float)((i * j + 1) % M) / M;

    sgemm(M, N, K, 0.5f, A, B, 0.75f, C);

    double sum = emit(C, M * N);
    printf("%.6f\n", sum / (M * N));
    return 0;
}
