#ifndef RHLAB_H
#define RHLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>
#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

/*
 Result codes of every fallible call.
 */
typedef enum RhlabStatus {
  RHLAB_STATUS_OK = 0,
  /*
   A null pointer, a too-small buffer or an out-of-range enum value.
   */
  RHLAB_STATUS_INVALID_ARGUMENT = 1,
  /*
   Parameters rejected by validation.
   */
  RHLAB_STATUS_INVALID_PARAMS = 2,
  /*
   A numerical precondition failed (margin, aliasing, conditioning).
   */
  RHLAB_STATUS_NUMERICAL = 3,
  /*
   A size or memory limit was hit.
   */
  RHLAB_STATUS_RESOURCE = 4,
  RHLAB_STATUS_INTERNAL = 5,
  RHLAB_STATUS_PANIC = 6,
} RhlabStatus;

/*
 Scale selection of an assembled operator.
 */
typedef enum RhlabMode {
  RHLAB_MODE_FULL = 0,
  RHLAB_MODE_GAP = 1,
} RhlabMode;

/*
 Which part of an assembled operator to return.
 */
typedef enum RhlabPart {
  /*
   The full operator `H_M`.
   */
  RHLAB_PART_H = 0,
  /*
   The lower-band sum (gap mode).
   */
  RHLAB_PART_MINUS = 1,
  /*
   The upper-band sum (gap mode).
   */
  RHLAB_PART_PLUS = 2,
} RhlabPart;

/*
 Complex kernel on the integers.
 */
typedef struct RhlabComplexKernel RhlabComplexKernel;

/*
 Real kernel on the integers.
 */
typedef struct RhlabKernel RhlabKernel;

/*
 Validated parameter set.
 */
typedef struct RhlabParams RhlabParams;

/*
 Building-block axiom report of one kernel at one scale.
 */
typedef struct RhlabBlockReport {
  uint64_t scale;
  double mean_re;
  double mean_im;
  double l1;
  /*
   l1 mass outside `[-s, s]`.
   */
  double overhang;
  double d_iii;
  double d_iv;
  double d_min;
  uint64_t worst_h;
  bool mean_free;
  bool supported;
} RhlabBlockReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Version string of the library; static storage.
 */
const char *rhlab_version(void);

/*
 Message of the last failing call on this thread, or null. The pointer
 stays valid until the next failing call on the same thread.
 */
const char *rhlab_last_error(void);

/*
 Validates `(alpha, delta, m, mode)` with the default `omega`,
 `gamma_resc` and `c_split`.
 */
enum RhlabStatus rhlab_params_new(double alpha,
                                  double delta,
                                  uint64_t m,
                                  enum RhlabMode mode,
                                  struct RhlabParams **out);

/*
 # Safety
 `p` must be null or a handle from [`rhlab_params_new`] not yet freed.
 */
void rhlab_params_free(struct RhlabParams *p);

/*
 Copies the operator's dyadic scales into `out` (capacity `cap`) and
 stores their number in `len`. With `out` null only `len` is written.
 */
enum RhlabStatus rhlab_params_scales(const struct RhlabParams *p,
                                     uint64_t *out,
                                     uintptr_t cap,
                                     uintptr_t *len);

/*
 Assembles `H_M` and returns the requested part.
 */
enum RhlabStatus rhlab_assemble(const struct RhlabParams *p,
                                enum RhlabPart part,
                                struct RhlabKernel **out);

/*
 The transform block of dyadic scale `s`; `first_scale` selects the
 plateau cutoff instead of the annular one.
 */
enum RhlabStatus rhlab_block_kernel(const struct RhlabParams *p,
                                    uint64_t s,
                                    bool first_scale,
                                    struct RhlabKernel **out);

/*
 A kernel with `values[i]` at `base + i`.
 */
enum RhlabStatus rhlab_kernel_new(int64_t base,
                                  const double *values,
                                  uintptr_t len,
                                  struct RhlabKernel **out);

/*
 # Safety
 `k` must be null or a kernel handle from this library not yet freed.
 */
void rhlab_kernel_free(struct RhlabKernel *k);

/*
 First stored index and number of stored values.
 */
enum RhlabStatus rhlab_kernel_window(const struct RhlabKernel *k, int64_t *base, uintptr_t *len);

/*
 Copies the stored values into `out` (capacity `cap`).
 */
enum RhlabStatus rhlab_kernel_values(const struct RhlabKernel *k, double *out, uintptr_t cap);

/*
 `K(x)`, zero outside the stored window (and for a null handle).
 */
double rhlab_kernel_get(const struct RhlabKernel *k, int64_t x);

enum RhlabStatus rhlab_convolve(const struct RhlabKernel *a,
                                const struct RhlabKernel *b,
                                struct RhlabKernel **out);

/*
 l2 operator norm of convolution by `k` (sup of the symbol modulus).
 */
enum RhlabStatus rhlab_op_norm(const struct RhlabKernel *k, double *out);

/*
 `sup_t t #{x : |K(x)| > t}`.
 */
enum RhlabStatus rhlab_weak_l1(const struct RhlabKernel *k, double *out);

/*
 Building-block axioms of `k` at scale `s` with Hölder exponent `omega`.
 */
enum RhlabStatus rhlab_check_block(const struct RhlabKernel *k,
                                   uint64_t s,
                                   double omega,
                                   struct RhlabBlockReport *out);

/*
 Kernel of `(lambda + H_M)^-1` for `lambda = lambda_re + i lambda_im`.
 */
enum RhlabStatus rhlab_resolvent(const struct RhlabParams *p,
                                 double lambda_re,
                                 double lambda_im,
                                 struct RhlabComplexKernel **out);

/*
 # Safety
 `k` must be null or a complex kernel handle from this library not yet freed.
 */
void rhlab_complex_kernel_free(struct RhlabComplexKernel *k);

enum RhlabStatus rhlab_complex_kernel_window(const struct RhlabComplexKernel *k,
                                             int64_t *base,
                                             uintptr_t *len);

/*
 Copies real and imaginary parts into `re` and `im` (capacity `cap` each).
 */
enum RhlabStatus rhlab_complex_kernel_values(const struct RhlabComplexKernel *k,
                                             double *re,
                                             double *im,
                                             uintptr_t cap);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RHLAB_H */
