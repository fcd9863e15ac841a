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

#define NI 8
#define NJ 8
#define NK 8
#define NL 8

void kernel_2mm(int ni, int nj, int nk, int nl, float alpha, float beta,
                float *tmp, const float *A, const float *B, const float *C, float *D);

static float tmp[NI * NJ], A[NI * NK], B[NK * NJ], C[NJ * NL], D[NI * NL];

int main(void)
{
    for (int i = 0; i < NI; i++)
        for (int k = 0; k < NK; k++)
            A[i * NK + k] = (float)((i * k + 1) % NI) / NI;
    for (int k = 0; k < NK; k++)
        for (int j = 0; j < NJ; j++)
            B[k * NJ + j] = (float)((k * (j + 1)) % NJ) / NJ;
    for (int j = 0; j < NJ; j++)
        for (int l = 0; l < NL; l++)
            C[j * NL + l] = (float)((j * (l + 3)) % NL) / NL;
    for (int i = 0; i < NI; i++)
        for (int l = 0; l < NL; l++)
            D[i * NL + l] = (float)((i * (l + 2)) % NK) / NK;

    kernel_2mm(NI, NJ, NK, NL, 0.25f, 0.5f, tmp, A, B, C, D);

    double sum = emit(D, NI * NL);
    printf("%.6f\n", sum / (NI * NL));
    return 0;
}
