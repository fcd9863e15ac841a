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

#define H 12
#define W 12
#define KH 3
#define KW 3

void conv2d(int h, int w, const float *in, int kh, int kw, const float *k, float *out);

static float in[H * W];
static float k[KH * KW];
static float out[(H - KH + 1) * (W - KW + 1)];

int main(void)
{
    for (int i = 0; i < H; i++)
        for (int j = 0; j < W; j++)
            in[i * W + j] = (float)((i * 5 + j * 3) % 17) / 17.0f;
    for (int i = 0; i < KH * KW; i++)
        k[i] = (float)(i % 4 - 1) / 4.0f;

    conv2d(H, W, in, KH, KW, k, out);

    int n = (H - KH + 1) * (W - KW + 1);
    double sum = emit(out, n);
    printf("%.6f\n", sum / n);
    return 0;
}
