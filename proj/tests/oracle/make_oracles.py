"""High-precision reference values frozen into the unit tests.

Run with mpmath installed; paste the printed literals where they are used.
"""
from mpmath import mp, mpf, ncdf, erfc, sqrt, betainc, log, exp, atan, pi, findroot, fsum

mp.dps = 50


def phi(x):
    return ncdf(mpf(x))


def phi_sf(x):
    return erfc(mpf(x) / sqrt(2)) / 2


def t_cdf(x, df):
    x = mpf(x)
    df = mpf(df)
    tail = betainc(df / 2, mpf(1) / 2, 0, df / (df + x * x), regularized=True) / 2
    return 1 - tail if x > 0 else tail


def kl(p0, p1):
    p0, p1 = mpf(p0), mpf(p1)
    a = 0 if p0 == 0 else p0 * log(p0 / p1)
    b = 0 if p0 == 1 else (1 - p0) * log((1 - p0) / (1 - p1))
    return a + b


def quantile(p):
    return findroot(lambda x: ncdf(x) - mpf(p), 0)


def show(label, v):
    print(f"{label:40s} {mp.nstr(v, 20)}")


show("Phi(-1.959964)", phi("-1.959964"))
show("sf(10)", phi_sf(10))
show("sf(8.5)", phi_sf("8.5"))
show("sf(37)", phi_sf(37))
show("Phi(-20)", phi(-20))
show("Phi(0.3)", phi("0.3"))
show("Phi(-3.7)", phi("-3.7"))
show("Phi(1.2345)", phi("1.2345"))
show("q(0.975)", quantile("0.975"))
show("q(1e-6)", quantile("1e-6"))
show("q(1e-300)", findroot(lambda x: log(ncdf(x)) - log(mpf("1e-300")), -37))
show("q(0.3)", quantile("0.3"))
show("t(2,60)", t_cdf(2, 60))
show("t(1,1)", t_cdf(1, 1))
show("t(-3,5)", t_cdf(-3, 5))
show("t(0.5,3)", t_cdf("0.5", 3))
show("t(10,2)", t_cdf(10, 2))
show("t(1.5,1000)", t_cdf("1.5", 1000))
show("t(-40,7)", t_cdf(-40, 7))
show("I_0.3(2.5,4)", betainc(mpf("2.5"), 4, 0, mpf("0.3"), regularized=True))
show("I_0.9(30,0.5)", betainc(30, mpf("0.5"), 0, mpf("0.9"), regularized=True))
show("I_0.05(0.5,200)", betainc(mpf("0.5"), 200, 0, mpf("0.05"), regularized=True))
show("kl(0.5,0.25)", kl("0.5", "0.25"))
show("kl(0.1,0.5)*2", 2 * kl("0.1", "0.5"))
show("kl(1e-6,0.1)", kl("1e-6", "0.1"))
r = mpf("0.5")
show("pairwise(0.5,n=5) upper", 1 - t_cdf(2 * r / sqrt(1 - r * r), 4))
show("rowmax cdf(0.1,n=50,p=20)", t_cdf(sqrt(49) * mpf("0.1") / sqrt(1 - mpf("0.01")), 49) ** 19)

# ALR on the null grid, N=10, alpha0=0.5
N = 10
alr = fsum(1 / (2 * i * log(mpf(N) / 3)) for i in range(1, 6))
show("ALR null grid", alr)
show("log ALR null grid", log(alr))
# one tiny P-value: pi = [1e-6, 2/10, ..., 10/10]
pis = [mpf("1e-6")] + [mpf(i) / N for i in range(2, N + 1)]
terms = []
for i in range(1, 6):
    d = kl(pis[i - 1], mpf(i) / N)
    terms.append(exp(N * max(d, 0)) / (2 * i * log(mpf(N) / 3)))
show("log ALR tiny", log(fsum(terms)))
show("HC comp [0.1,0.9] i=1", sqrt(2) * (mpf("0.5") - mpf("0.1")) / sqrt(mpf("0.09")))
show("HC comp [0.1,0.9] i=2", sqrt(2) * (1 - mpf("0.9")) / sqrt(mpf("0.09")))
show("HC star [0.001,..]", 2 * (mpf("0.25") - mpf("0.001")) / sqrt(mpf("0.001") * mpf("0.999")))
show("feature N=4", 2 * (mpf("0.25") - mpf("0.01")) / sqrt(mpf("0.25") * mpf("0.75")))
show("pairHC n=100 k=90", 10 * (mpf("0.11") - mpf("0.01")) / sqrt(mpf("0.01") * mpf("0.99")))
show("pairHC n=4 k=2", 2 * (mpf("0.5") - mpf("0.25")) / sqrt(mpf("0.25") * mpf("0.75")))
show("hc_at_level(250,.05,11)", sqrt(250) * (mpf(11) / 250 - mpf("0.05")) / sqrt(mpf("0.05") * mpf("0.95")))
