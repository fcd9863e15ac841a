#include <stdio.h>

#define H 10
#define W 6

void rotate(int h, int w, const unsigned char *src, unsigned char *dst);

static unsigned char src[H * W];
static unsigned char dst[W * H];

int main(void)
{
    for (int i = 0; i < H; i++)
        for (int j = 0; j < W; j++)
            src[i * W + j] = (unsigned char)((i * 19 + j * 7 + 3) % 251);

    rotate(H, W, src, dst);

    long sum = 0;
    for (int i = 0; i < W * H; i++) {
        printf("%d\n", dst[i]);
        sum += dst[i];
    }
    printf("%.6f\n", (double)sum / (W * H));
    return 0;
}
