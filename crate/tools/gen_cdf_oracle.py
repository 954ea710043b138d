# Independent oracle: adaptive quadrature of the densities at 30 digits.
import random
from mpmath import mp, mpf, quad, gamma, beta, sqrt, pi, exp, inf
mp.dps = 30
random.seed(20240601)

def t_pdf(x, v):
    return gamma((v + 1) / 2) / (sqrt(v * pi) * gamma(v / 2)) * (1 + x * x / v) ** (-(v + 1) / 2)

def t_cdf(x, v):
    x = mpf(x); v = mpf(v)
    half = quad(lambda s: t_pdf(s, v), [0, abs(x)]) if x != 0 else mpf(0)
    return mpf(0.5) + half if x >= 0 else mpf(0.5) - half

def f_cdf(x, a, b):
    # substitution s = u^(2/a) removes the x^(a/2-1) endpoint singularity
    x = mpf(x); a = mpf(a); b = mpf(b)
    if x == 0:
        return mpf(0)
    c = (2 / a) * (a / b) ** (a / 2) / beta(a / 2, b / 2)
    g = lambda u: c * (1 + a * u ** (2 / a) / b) ** (-(a + b) / 2)
    top = x ** (a / 2)
    pts = [0] + [p for p in (mpf('0.01'), mpf('0.1'), mpf(1), mpf(10)) if p < top] + [top]
    return quad(g, pts, maxdegree=12)

def chi2_cdf(x, k):
    # substitution s = u^(2/k)
    x = mpf(x); k = mpf(k)
    if x == 0:
        return mpf(0)
    c = (2 / k) / (2 ** (k / 2) * gamma(k / 2))
    g = lambda u: c * exp(-u ** (2 / k) / 2)
    top = x ** (k / 2)
    pts = [0] + [p for p in (mpf('0.01'), mpf('0.1'), mpf(1), mpf(10), mpf(100), mpf(1000)) if p < top] + [top]
    return quad(g, pts, maxdegree=12)

rows = []
def add(kind, x, d1, d2, val):
    rows.append((kind, x, d1, d2, val))

# fixed anchors
for x, v in [(0, 1), (0, 7.5), (2.228, 10), (1, 8), (-1, 8), (0.6546536707079771, 5), (-2.5, 3), (3.0, 1), (-0.5, 2), (1.96, 1000)]:
    add("t", x, v, 0, t_cdf(x, v))
for x, a, b in [(4, 9, 9), (0.25, 9, 9), (1, 9, 9), (1, 1, 1), (3.5, 2, 27), (0.5, 5, 3), (10, 2, 2), (2.0, 2.5, 17.3)]:
    add("f", x, a, b, f_cdf(x, a, b))
for x, k in [(20, 2), (0.5, 1), (3.84, 1), (5.99, 2), (1, 5), (30, 10), (0.1, 0.5), (12.3, 7.7)]:
    add("chi2", x, k, 0, chi2_cdf(x, k))

def rnd(lo, hi, digits=4):
    return round(random.uniform(lo, hi), digits)

for _ in range(40):
    v = rnd(0.8, 60, 3); x = rnd(-6, 6)
    add("t", x, v, 0, t_cdf(x, v))
for _ in range(35):
    a = rnd(1, 40, 3); b = rnd(2, 60, 3); x = rnd(0.02, 8)
    add("f", x, a, b, f_cdf(x, a, b))
for _ in range(35):
    k = rnd(1, 30, 3); x = rnd(0.05, 60)
    add("chi2", x, k, 0, chi2_cdf(x, k))

with open('/root/crate/crates/core/data/cdf_oracle.tsv', 'w') as fh:
    fh.write("# Reference CDF values from 30-digit adaptive quadrature of the densities.\n")
    fh.write("# kind\tx\tdf1\tdf2\tcdf\ttolerance\n")
    for kind, x, d1, d2, val in rows:
        fh.write("%s\t%r\t%r\t%r\t%s\t1e-8\n" % (kind, float(x), float(d1), float(d2), mp.nstr(val, 20)))
print(len(rows))
