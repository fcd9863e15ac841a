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

#define H 16
#define W 16

void pooling(int h, int w, const float *in, float *out);

static float in[H * W];
static float out[(H / 2) * (W / 2)];

int main(void)
{
    for (int i = 0; i < H; i++)
        for (int j = 0; j < W; j++)
            in[i * W + j] = (float)((i * 7 + j * 13) % 23) / 23.0f - 0.5f;

    pooling(H, W, in, out);

    int n = (H / 2) * (W / 2);
    double sum = emit(out, n);
    printf("%.6f\n", sum / n);
    return 0;
}
