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

void correlation(int m, int n, float float_n, float *data, float *corr,
                 float *mean, float *stddev);

static float data[NN * M];
static float corr[M * M];
static float mean[M];
static float stddev[M];

int main(void)
{
    for (int i = 0; i < NN; i++)
        for (int j = 0; j < M; j++)
            data[i * M + j] = (float)((i * (j + 1) + j) % 13) / 13.0f + (float)i / NN;

    correlation(M, NN, (float)NN, data, corr, mean, stddev);

    double sum = emit(corr, M * M);
    sum += emit(mean, M);
    sum += emit(stddev, M);
    printf("%.6f\n", sum / (M * M + 2 * M));
    return 0;
}
