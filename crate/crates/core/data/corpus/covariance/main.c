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

#define M 8
#define NN 12

void covariance(int m, int n, float float_n, float *data, float *cov, float *mean);

static float data[NN * M];
static float cov[M * M];
static float mean[M];

int main(void)
{
    for (int i = 0; i < NN; i++)
        for (int j = 0; j < M; j++)
            data[i * M + j] = (float)((i * (j + 2) + 3 * j) % 11) / 11.0f;

    covariance(M, NN, (float)NN, data, cov, mean);

    double sum = emit(cov, M * M);
    sum += emit(mean, M);
    printf("%.6f\n", sum / (M * M + M));
    return 0;
}
