void conv2d(int h, int w, const float *in, int kh, int kw, const float *k, float *out)
{
    int oh = h - kh + 1;
    int ow = w - kw + 1;
    for (int y = 0; y < oh; y++) {
        for (int x = 0; x < ow; x++) {
            float acc = 0.0f;
            for (int i = 0; i < kh; i++)
                for (int j = 0; j < kw; j++)
                    acc += in[(y + i) * w + (x + j)] * k[i * kw + j];
            out[y * ow + x] = acc;
        }
    }
}
