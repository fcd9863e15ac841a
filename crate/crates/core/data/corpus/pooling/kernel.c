void pooling(int h, int w, const float *in, float *out)
{
    int oh = h / 2;
    int ow = w / 2;
    for (int y = 0; y < oh; y++) {
        for (int x = 0; x < ow; x++) {
            float m = in[(2 * y) * w + 2 * x];
            for (int dy = 0; dy < 2; dy++) {
                for (int dx = 0; dx < 2; dx++) {
                    float v = in[(2 * y + dy) * w + 2 * x + dx];
                    if (v > m)
                        m = v;
                }
            }
            out[y * ow + x] = m;
        }
    }
}
