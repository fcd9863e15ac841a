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

#define TSTEPS 8
#define N 32

void jacobi_1d(int tsteps, int n, float *A, float *B);

static float A[N], B[N];

int main(void)
{
    for (int i = 0; i < N; i++) {
        A[i] = ((float)i + 2.0f) / N;
        B[i] = ((float)i + 3.0f) / N;
    }

    jacobi_1d(TSTEPS, N, A, B);

    double sum = emit(A, N);
    printf("%.6f\n", sum / N);
    return 0;
}
