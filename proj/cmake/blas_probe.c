/* Exit 0 if dgemm and dtrsm agree with naive loops on small odd shapes. */
#include <math.h>

void dgemm_(const char*, const char*, const int*, const int*, const int*, const double*, const double*,
            const int*, const double*, const int*, const double*, double*, const int*);
void dtrsm_(const char*, const char*, const char*, const char*, const int*, const int*, const double*,
            const double*, const int*, double*, const int*);

static unsigned seed = 12345u;
static double rnd(void) { return (double)((seed = seed * 1103515245u + 12345u) >> 16) / 65536.0 - 0.5; }

int main(void) {
  enum { N = 32 };
  static double A[N * N], B[N * N], C[N * N], R[N * N];
  const double one = 1.0, minus = -1.0;
  for (int m = 1; m <= 24; ++m)
    for (int n = 1; n <= 24; n += 5) {
      const int k = (m + n) / 2 + 1, ld = N;
      for (int i = 0; i < N * N; ++i) {
        A[i] = rnd();
        B[i] = rnd();
        C[i] = R[i] = rnd();
      }
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i)
          for (int l = 0; l < k; ++l) R[i + j * ld] -= A[i + l * ld] * B[l + j * ld];
      dgemm_("N", "N", &m, &n, &k, &minus, A, &ld, B, &ld, &one, C, &ld);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i)
          if (!(fabs(C[i + j * ld] - R[i + j * ld]) <= 1e-12)) return 1;

      /* Unit lower triangular solve L X = C, checked by multiplying back. */
      for (int i = 0; i < N * N; ++i) R[i] = C[i];
      dtrsm_("L", "L", "N", "U", &m, &n, &one, A, &ld, C, &ld);
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) {
          double t = C[i + j * ld];
          for (int l = 0; l < i; ++l) t += A[i + l * ld] * C[l + j * ld];
          if (!(fabs(t - R[i + j * ld]) <= 1e-9 * (1.0 + fabs(R[i + j * ld])))) return 2;
        }
    }
  return 0;
}
