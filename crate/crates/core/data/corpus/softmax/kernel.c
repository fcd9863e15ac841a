#include <math.h>

void softmax(int n, const float *in, float *out)
{
    float max = in[0];
    for (int i = 1; i < n; i++)
        if (in[i] > max)
            max = in[i];
    float sum = 0.0f;
    for (int i = 0; i < n; i++) {
        out[i] = expf(in[i] - max);
        sum += out[i];
    }
    for (int i = 0; i < n; i++)
        out[i] = out[i] / sum;
}
