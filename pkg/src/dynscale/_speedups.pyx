# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled one-pass training kernel.

Hot path for grid search and reproduction runs: one function drives the
classify-then-update stream loop for every learner variant, including the
running-statistics bookkeeping (GN), snapshot averaging (+avg), and the
cumulative-error curve.

Every floating-point expression is grouped exactly as in the pure-Python
learners (dynscale/learners.py) so both backends produce bit-identical
parameters; change them together or the equivalence tests will fail.
"""

import numpy as np

from libc.math cimport exp, isfinite, sqrt

# variant codes (see dynscale/_backend.py)
cdef enum:
    V_SGD = 0
    V_GN = 1
    V_FS = 2
    V_FS1 = 3
    V_FS2 = 4
    V_FS3 = 5
    V_PA = 6
    V_PA1 = 7
    V_PA2 = 8

# failure codes reported back to Python (order matches _check_finite)
cdef enum:
    F_NONE = -1
    F_W = 0
    F_ALPHA = 1
    F_BETA = 2
    F_B = 3


cdef inline double _sigmoid(double s) noexcept nogil:
    cdef double e
    if s >= 0.0:
        return 1.0 / (1.0 + exp(-s))
    e = exp(s)
    return e / (1.0 + e)


cdef inline void _scale_row(int variant, const double* x, Py_ssize_t m,
                            const double* alpha, const double* beta,
                            const double* stats_mean, const double* stats_sq,
                            long stats_count, double* out) noexcept nogil:
    """Apply the variant's feature transform to one raw row."""
    cdef Py_ssize_t j
    cdef double d, s
    if variant == V_GN:
        for j in range(m):
            if stats_count < 2:
                d = 1.0
            else:
                s = stats_sq[j]
                if s == 0.0:
                    d = 1.0
                else:
                    d = sqrt(s / (stats_count - 1))
            out[j] = (x[j] - stats_mean[j]) / d
    elif variant == V_FS or variant == V_FS1:
        for j in range(m):
            out[j] = _sigmoid(alpha[j] * x[j] - beta[j])
    elif variant == V_FS2 or variant == V_FS3:
        for j in range(m):
            out[j] = alpha[j] * x[j] + beta[j]
    else:
        for j in range(m):
            out[j] = x[j]


def train_one_pass(int variant,
                   const double[:, ::1] X, const long[::1] labels,
                   double[::1] w, double[::1] alpha, double[::1] beta, double b,
                   double[::1] stats_mean, double[::1] stats_sq, long stats_count,
                   bint averaged,
                   double[::1] sum_w, double[::1] sum_alpha, double[::1] sum_beta,
                   double sum_b, long snapshots,
                   double lam, double mu, double nu, double c,
                   double eta0, long passes, long n_train,
                   long k0, bint validate, long[::1] curve):
    """Run the full stream through one learner; mutates parameter arrays.

    Returns (b, stats_count, sum_b, snapshots, k, fail_param, fail_index);
    fail_param >= 0 flags the first non-finite parameter group. With
    validate false, overflow saturates per IEEE semantics and the pass
    always completes (fail_param stays -1).
    """
    cdef Py_ssize_t n_rows = X.shape[0]
    cdef Py_ssize_t m = X.shape[1]

    cdef bint trains_w = variant != V_FS3
    cdef bint trains_alpha = variant == V_FS or variant == V_FS2 or variant == V_FS3
    cdef bint trains_beta = (variant == V_FS or variant == V_FS1 or
                             variant == V_FS2 or variant == V_FS3)
    cdef bint is_pa = variant == V_PA or variant == V_PA1 or variant == V_PA2
    cdef bint is_logistic = not is_pa

    if m < 1:
        raise ValueError("need at least one feature")

    scratch = np.empty((5, m), dtype=np.float64)
    cdef double[:, ::1] buf = scratch
    cdef double* scaled_cur = &buf[0, 0]
    cdef double* scaled_pred = &buf[1, 0]
    cdef double* w_c = &buf[2, 0]
    cdef double* alpha_c = &buf[3, 0]
    cdef double* beta_c = &buf[4, 0]

    cdef double* sm = NULL
    cdef double* ss = NULL
    if stats_mean.shape[0] > 0:
        sm = &stats_mean[0]
        ss = &stats_sq[0]

    cdef long k = k0
    cdef long errors = 0
    cdef int fail_param = F_NONE
    cdef long fail_index = -1

    cdef Py_ssize_t n, j
    cdef long label
    cdef double t01, eta, y, coef, acc, score, b_c
    cdef double decay_w, decay_a, decay_b
    cdef double delta, wj, g, new_w, new_a, new_be
    cdef double margin, loss, sq_norm, tau, tt, step
    cdef double pred
    cdef const double* x

    for n in range(n_rows):
        x = &X[n, 0]
        label = labels[n]

        # unsupervised statistics fold in the instance before anything uses it
        if variant == V_GN:
            stats_count += 1
            for j in range(m):
                delta = x[j] - sm[j]
                sm[j] += delta / stats_count
                ss[j] += delta * (x[j] - sm[j])

        _scale_row(variant, x, m, &alpha[0], &beta[0], sm, ss,
                   stats_count, scaled_cur)

        # classification with the prediction-time parameters
        if averaged and snapshots > 0:
            for j in range(m):
                w_c[j] = sum_w[j] / (<double> snapshots) if trains_w else w[j]
            b_c = sum_b / (<double> snapshots)
            if variant == V_FS or variant == V_FS1 or variant == V_FS2 or variant == V_FS3:
                for j in range(m):
                    alpha_c[j] = (sum_alpha[j] / (<double> snapshots)
                                  if trains_alpha else alpha[j])
                    beta_c[j] = (sum_beta[j] / (<double> snapshots)
                                 if trains_beta else beta[j])
                _scale_row(variant, x, m, alpha_c, beta_c, NULL, NULL, 0, scaled_pred)
            else:
                for j in range(m):
                    scaled_pred[j] = scaled_cur[j]
        else:
            for j in range(m):
                w_c[j] = w[j]
            b_c = b
            for j in range(m):
                scaled_pred[j] = scaled_cur[j]

        acc = 0.0
        for j in range(m):
            acc += w_c[j] * scaled_pred[j]
        score = acc + b_c
        pred = 1.0 if score >= 0.0 else -1.0
        if pred != (<double> label):
            errors += 1
        curve[n] = errors

        # learning update from the pre-update parameters
        if is_logistic:
            acc = 0.0
            for j in range(m):
                acc += w[j] * scaled_cur[j]
            y = _sigmoid(acc + b)
            eta = eta0 / (1.0 + (<double> k) / (<double> (passes * n_train)))
            t01 = 1.0 if label > 0 else 0.0

            if variant == V_SGD or variant == V_GN:
                coef = eta * (t01 - y)
                decay_w = 1.0 - 2.0 * (lam / n_train) * eta
                for j in range(m):
                    w[j] = w[j] * decay_w + coef * scaled_cur[j]
                b = b + coef
            elif variant == V_FS or variant == V_FS1:
                coef = eta * (t01 - y)
                decay_w = 1.0 - 2.0 * (lam / n_train) * eta
                decay_a = 1.0 - 2.0 * (mu / n_train) * eta
                decay_b = 1.0 - 2.0 * (nu / n_train) * eta
                for j in range(m):
                    wj = w[j]
                    g = (wj * scaled_cur[j]) * (1.0 - scaled_cur[j])
                    new_w = wj * decay_w + coef * scaled_cur[j]
                    if variant == V_FS:
                        alpha[j] = alpha[j] * decay_a + coef * (x[j] * g)
                    beta[j] = beta[j] * decay_b - coef * g
                    w[j] = new_w
                b = b + coef
            elif variant == V_FS2:
                coef = eta * (y - t01)
                decay_w = 1.0 - 2.0 * (lam / n_train) * eta
                decay_a = 1.0 - 2.0 * (mu / n_train) * eta
                decay_b = 1.0 - 2.0 * (nu / n_train) * eta
                for j in range(m):
                    wj = w[j]
                    new_a = alpha[j] * decay_a - coef * (wj * x[j])
                    new_be = beta[j] * decay_b - coef * wj
                    w[j] = wj * decay_w - coef * scaled_cur[j]
                    alpha[j] = new_a
                    beta[j] = new_be
                b = b - coef
            else:  # V_FS3
                coef = eta * (y - t01)
                decay_a = 1.0 - 2.0 * (mu / n_train) * eta
                decay_b = 1.0 - 2.0 * (nu / n_train) * eta
                for j in range(m):
                    alpha[j] = alpha[j] * decay_a - coef * x[j]
                    beta[j] = beta[j] * decay_b - coef
                b = b - coef

            if validate:
                fail_param = _check_finite(w, alpha, beta, b)
        else:
            acc = 0.0
            for j in range(m):
                acc += w[j] * x[j]
            score = acc + b
            margin = (<double> label) * score
            loss = 1.0 - margin
            if loss > 0.0:
                sq_norm = 1.0  # constant augmentation component
                for j in range(m):
                    sq_norm += x[j] * x[j]
                if variant == V_PA:
                    tau = loss / sq_norm
                elif variant == V_PA1:
                    tt = loss / sq_norm
                    tau = c if c < tt else tt
                else:
                    tau = loss / (sq_norm + 1.0 / (2.0 * c))
                step = tau * (<double> label)
                for j in range(m):
                    w[j] = w[j] + step * x[j]
                b = b + step
                if validate:
                    fail_param = _check_finite(w, alpha, beta, b)

        if fail_param != F_NONE:
            fail_index = k
            break

        k += 1

        if averaged:
            for j in range(m):
                sum_w[j] += w[j]
                sum_alpha[j] += alpha[j]
                sum_beta[j] += beta[j]
            sum_b += b
            snapshots += 1

    return b, stats_count, sum_b, snapshots, k, fail_param, fail_index


cdef int _check_finite(double[::1] w, double[::1] alpha, double[::1] beta,
                       double b) noexcept nogil:
    cdef Py_ssize_t j
    for j in range(w.shape[0]):
        if not isfinite(w[j]):
            return F_W
    for j in range(alpha.shape[0]):
        if not isfinite(alpha[j]):
            return F_ALPHA
    for j in range(beta.shape[0]):
        if not isfinite(beta[j]):
            return F_BETA
    if not isfinite(b):
        return F_B
    return F_NONE
