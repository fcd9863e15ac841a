#include <stdio.h>

#define SH 8
#define SW 8
#define DH 12
#define DW 12

void resize(int sh, int sw, const unsigned char *src, int dh, int dw, unsigned char *dst);

static unsigned char src[SH * SW];
static unsigned char dst[DH * DW];

int main(void)
{
    for (int i = 0; i < SH; i++)
        for (int j = 0; j < SW; j++)
            src[i * SW + j] = (unsigned char)((i * 37 + j * 11) % 256);

    resize(SH, SW, src, DH, DW, dst);

    long sum = 0;
    for (int i = 0; i < DH * DW; i++) {
        printf("%d\n", dst[i]);
        sum += dst[i];
    }
    printf("%.6f\n", (double)sum / (DH * DW));
    return 0;
}
