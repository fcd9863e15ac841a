void rotate(int h, int w, const unsigned char *src, unsigned char *dst)
{
    for (int i = 0; i < h; i++)
        for (int j = 0; j < w; j++)
            dst[j * h + (h - 1 - i)] = src[i * w + j];
}
