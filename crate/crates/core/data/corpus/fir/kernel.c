void fir(int n, int taps, const float *x, const float *h, float *y)
{
    for (int i = 0; i < n; i++) {
        float acc = 0.0f;
        for (int t = 0; t < taps; t++)
            if (i - t >= 0)
                acc += h[t] * x[i - t];
        y[i] = acc;
    }
}
