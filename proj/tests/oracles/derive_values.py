"""Independent high-precision values frozen into the unit tests."""
from mpmath import mp, mpf, log

mp.dps = 40


def h2(x):
    x = mpf(x)
    if x in (0, 1):
        return mpf(0)
    return -x * log(x, 2) - (1 - x) * log(1 - x, 2)


LOG2E = 1 / log(2)


def and_branch(p, q, c):
    p, q = mpf(p), mpf(q)
    if p == 0 or q == 0:
        return mpf(0)
    return h2(p) + p * h2(q) + p * log(q, 2) + p * (1 - c * q) * LOG2E


def r_both(p, q):
    return and_branch(min(p, q), max(p, q), 1)


def r_at_b(p, q):
    p, q = mpf(p), mpf(q)
    if q >= mpf(1) / 2:
        return h2(p)
    if p > mpf(1) / 2:
        p = 1 - p
    return and_branch(min(p, q), max(p, q), 2)


def blahut_arimoto(p, d, iters=20000):
    # Binary source, Hamming distortion; sweep the slope until E[d] hits d.
    import math
    px = [1 - float(p), float(p)]
    lo, hi = 0.0, 50.0
    for _ in range(200):
        s = 0.5 * (lo + hi)
        qz = [0.5, 0.5]
        for _ in range(2000):
            cond = [[qz[z] * math.exp(-s * (x != z)) for z in range(2)] for x in range(2)]
            cond = [[c / sum(row) for c in row] for row in cond]
            qz = [sum(px[x] * cond[x][z] for x in range(2)) for z in range(2)]
        dist = sum(px[x] * cond[x][z] * (x != z) for x in range(2) for z in range(2))
        if dist > float(d):
            lo = s
        else:
            hi = s
    rate = sum(px[x] * cond[x][z] * math.log2(cond[x][z] / qz[z])
               for x in range(2) for z in range(2) if cond[x][z] > 0)
    return rate


if __name__ == "__main__":
    vals = {
        "h2(0.25)": h2("0.25"),
        "h2(0.3)": h2("0.3"),
        "h2(0.1)": h2("0.1"),
        "h2(0.375)": h2("0.375"),
        "r_both(0.5,0.5)": r_both("0.5", "0.5"),
        "r_both(0.3,0.4)": r_both("0.3", "0.4"),
        "r_at_b(0.3,0.4)": r_at_b("0.3", "0.4"),
        "r_at_b(0.4,0.3)": r_at_b("0.4", "0.3"),
        "rho_star_at_b(0.5,0.25)": h2("0.5") + h2("0.25") - r_at_b("0.5", "0.25"),
        "strip_B(q=0.4,beta 0->0.2)": h2("0.4") - mpf("0.8") * h2("0.5"),
        "strip_A(p=0.3,alpha 0->0.2)": h2("0.3") - mpf("0.8") * h2("0.375"),
        "R(D) p=0.3 D=0.1": h2("0.3") - h2("0.1"),
    }
    for k, v in vals.items():
        print(f"{k:32s} {mp.nstr(v, 17)}")
    print(f"{'blahut_arimoto p=0.3 D=0.1':32s} {blahut_arimoto('0.3', '0.1'):.12f}")
