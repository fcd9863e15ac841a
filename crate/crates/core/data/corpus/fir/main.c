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
#define TAPS 8

void fir(int n, int taps, const float *x, const float *h, float *y);

static float x[N];
static float h[TAPS];
static float y[N];

int main(void)
{
    for (int i = 0; i < N; i++)
        x[i] = (float)((i * 9) % 16) / 8.0f - 1.0f;
    for (int t = 0; t < TAPS; t++)
        h[t] = (float)(TAPS - t) / (TAPS * 4);

    fir(N, TAPS, x, h, y);

    double sum = emit(y, N);
    printf("%.6f\n", sum / N);
    return 0;
}
