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

#define TSTEPS 4
#define N 12

void jacobi_2d(int tsteps, int n, float *A, float *B);

static float A[N * N], B[N * N];

int main(void)
{
    for (int i = 0; i < N; i++) {
        for (int j = 0; j < N; j++) {
            A[i * N + j] = ((float)i * (j + 2) + 2.0f) / N;
            B[i * N + j] = ((float)i * (j + 3) + 3.0f) / N;
        }
    }

    jacobi_2d(TSTEPS, N, A, B);

    double sum = emit(A, N * N);
    printf("%.6f\n", sum / (N * N));
    return 0;
}
