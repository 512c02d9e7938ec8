"""Independent high-precision evaluation of the reference values frozen in the tests.

Run with: python3 tests/oracle/derive_values.py
"""
from mpmath import mp, mpf, log, zeta, inf

mp.dps = 40


def entropy(ps):
    return -sum(p * log(p) for p in ps if p > 0)


def escort(ps, n):
    w = [p ** n for p in ps]
    s = sum(w)
    return [x / s for x in w]


def joint_measures(cells, n):
    """cells: dict (i,j)->p. Returns (hx, hy, hxy, mi_entropy_form, mi_kl_form)."""
    e = dict(zip(cells.keys(), escort(list(cells.values()), n)))
    rows, cols = {}, {}
    for (i, j), p in e.items():
        rows[i] = rows.get(i, 0) + p
        cols[j] = cols.get(j, 0) + p
    hx, hy, hxy = entropy(rows.values()), entropy(cols.values()), entropy(e.values())
    kl = sum(p * log(p / (rows[i] * cols[j])) for (i, j), p in e.items())
    return hx, hy, hxy, hx + hy - hxy, kl


mixed = {(1, 1): mpf('0.4'), (1, 2): mpf('0.1'), (2, 1): mpf('0.1'), (2, 2): mpf('0.4')}
print("mixed n=1 shannon mi", joint_measures(mixed, 1)[3])
hx, hy, hxy, mi, kl = joint_measures(mixed, 2)
print("mixed n=2 escort", escort(list(mixed.values()), 2))
print("mixed n=2 hxy", hxy, "mi", mi, "kl", kl, "kappa", mi / hxy)
for n in (1, 2, 3, 4):
    hx, hy, hxy, mi, kl = joint_measures(mixed, n)
    print("mixed profile n=%d" % n, hx, hy, hxy, mi, mi / hxy)
print("H(4/5,1/5)", entropy([mpf(4) / 5, mpf(1) / 5]))
print("cdotc (0.5,0.25,0.25) n=3", escort([mpf('0.5'), mpf('0.25'), mpf('0.25')], 3))
print("zeta(4)/zeta(2)^2", zeta(4) / zeta(2) ** 2)
print("geometric(0.5) entropy 2ln2", 2 * log(2))

# LogSquared family: p_k = c / (k ln^2 k), k >= 3.


def em_sum(f, start, split=2000):
    """Direct terms below split, Euler-Maclaurin beyond.

    The integral is taken in the variable t = ln x so quadrature copes with the slowly
    decaying 1/(x ln^2 x) tail; extrapolating sum routines are unreliable on such series.
    """
    head = sum(f(mpf(k)) for k in range(start, split))
    a = mpf(split)
    integral = mp.quad(lambda t: f(mp.exp(t)) * mp.exp(t), [log(a), log(a) + 10, inf])
    d1 = mp.diff(f, a, 1)
    d3 = mp.diff(f, a, 3)
    return head + integral + f(a) / 2 - d1 / 12 + d3 / 720


norm = em_sum(lambda k: 1 / (k * log(k) ** 2), 3)
c = 1 / norm
print("logsquared normalizer sum", norm, "c", c)
for n in (2, 3, 4, 5, 6):
    eta = em_sum(lambda k: (c / (k * log(k) ** 2)) ** n, 3)
    print("logsquared eta_%d" % n, eta)
eta2 = em_sum(lambda k: (c / (k * log(k) ** 2)) ** 2, 3)
eta2_tail_terms = em_sum(lambda k: (c / (k * log(k) ** 2)) ** 2 * log(k * log(k) ** 2 / c), 3)
h2 = mp.log(eta2) + 2 * eta2_tail_terms / eta2
print("logsquared H_2", h2)
for K in (10, 20, 40):
    q = mpf('0.5')
    print("geometric(0.5) partial entropy K=%d" % K,
          -sum((1 - q) * q ** (k - 1) * log((1 - q) * q ** (k - 1)) for k in range(1, K + 1)))

# Example fixtures at order 2 (escort quantities do not depend on c beyond the mass split).
def p_log_squared(k):
    return c / (k * log(k) ** 2)


def xlogx_sum(ws):
    return -sum(w * log(w) for w in ws if w > 0)


# Diagonal joint: MI_2 = H_2 of the marginal, kappa_2 = 1.
print("diagonal mi_2", h2)

# Odd/even joint: row 1 holds odd columns, row 2 even columns; MI_2 = H_2(X), H_2(X,Y) = H_2(p).
odd = em_sum(lambda m: p_log_squared(2 * m + 1) ** 2, 1)   # k = 3, 5, 7, ...
even = em_sum(lambda m: p_log_squared(2 * m) ** 2, 2)      # k = 4, 6, 8, ...
hx2 = entropy([odd / eta2, even / eta2])
print("odd-even odd/even eta_2 split", odd, even, odd + even - eta2)
print("odd-even mi_2", hx2, "kappa_2", hx2 / h2)

# Perturbed uniform: four cells 0.25 - eps/4, diagonal eps * p_k for k >= 3.
for m in (1, 10, 100):
    eps = mpf(1) / m
    a = mpf('0.25') - eps / 4
    tail_w = eps ** 2 * eta2
    total = 4 * a ** 2 + tail_w
    # sum over diagonal of w ln(1/w) with w = (eps p_k)^2
    diag_b = eps ** 2 * (2 * eta2_tail_terms + 2 * log(1 / eps) * eta2)
    cells_b = 4 * xlogx_sum([a ** 2]) if a > 0 else 0
    hxy = log(total) + (cells_b + diag_b) / total
    rows_b = 2 * xlogx_sum([2 * a ** 2]) if a > 0 else 0
    hx = log(total) + (rows_b + diag_b) / total
    dist2 = eps ** 2 / 4 + eps ** 2 * eta2
    print("perturbed m=%d l2 %s mi_2 %s kappa_2 %s" % (m, mp.sqrt(dist2), 2 * hx - hxy, (2 * hx - hxy) / hxy))
