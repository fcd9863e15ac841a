void trmm(int m, int n, float alpha, const float *A, float *B)
{
    for (int i = 0; i < m; i++) {
        for (int j = 0; j < n; j++) {
            float acc = B[i * n + j];
            for (int k = i + 1; k < m; k++)
                acc += A[k * m + i] * B[k * n + j];
            B[i * n + j] = alpha * acc;
        }
    }
}
