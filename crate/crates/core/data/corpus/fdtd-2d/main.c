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

#define TMAX 4
#define NX 10
#define NY 12

void fdtd_2d(int tmax, int nx, int ny, float *ex, float *ey, float *hz, const float *fict);

static float ex[NX * NY], ey[NX * NY], hz[NX * NY];
static float fict[TMAX];

int main(void)
{
    for (int t = 0; t < TMAX; t++)
        fict[t] = (float)t / TMAX;
    for (int i = 0; i < NX; i++) {
        for (int j = 0; j < NY; j++) {
            ex[i * NY + j] = (float)(i * (j + 1) % NX) / NX;
            ey[i * NY + j] = (float)(i * (j + 2) % NY) / NY;
            hz[i * NY + j] = (float)(i * (j + 3) % NX) / NX;
        }
    }

    fdtd_2d(TMAX, NX, NY, ex, ey, hz, fict);

    double sum = emit(ex, NX * NY);
    sum += emit(ey, NX * NY);
    sum += emit(hz, NX * NY);
    printf("%.6f\n", sum / (3 * NX * NY));
    return 0;
}
