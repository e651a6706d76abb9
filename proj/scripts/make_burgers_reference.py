#!/usr/bin/env python3
"""Generate the Burgers reference grid data/burgers_reference.csv.

Solves u_t + u u_x = (0.001/pi) u_xx on [-1,1] with u(x,0) = -sin(pi x) and
u(t,-1) = u(t,1) = 0 by a Fourier pseudo-spectral method (the solution is odd
and 2-periodic, so the periodic solver honors the Dirichlet ends). Integrating
factor for the diffusion term, RK4 for the advection term, 2/3-rule dealiasing.

Output format (see README): one line "nx,nt,xmin,xmax,tmin,tmax", one line with
the six values, then nt rows of nx comma-separated u values. Row j holds the
solution at t_j = tmin + j*(tmax-tmin)/(nt-1); column i is
x_i = xmin + i*(xmax-xmin)/(nx-1).

A Cole-Hopf quadrature evaluation cross-checks a few smooth-region values.
"""

import numpy as np

NU = 0.001 / np.pi
NX_OUT = 1024
NT_OUT = 1024
OVERSAMPLE = 16          # spectral points per output cell
N = (NX_OUT - 1) * OVERSAMPLE


def rhs_advection(u_hat, k, mask):
    u = np.fft.irfft(u_hat, n=N)
    flux_hat = np.fft.rfft(0.5 * u * u) * mask
    return -1j * k * flux_hat


def solve():
    x = -1.0 + 2.0 * np.arange(N) / N
    k = np.pi * np.fft.rfftfreq(N, d=1.0 / N)  # domain length 2 -> k = pi*m
    mask = np.ones_like(k)
    mask[k > (2.0 / 3.0) * k.max()] = 0.0

    u_hat = np.fft.rfft(-np.sin(np.pi * x))
    t_out = np.linspace(0.0, 1.0, NT_OUT)
    rows = np.empty((NT_OUT, NX_OUT))

    def store(row, u_hat):
        u = np.fft.irfft(u_hat, n=N)
        rows[row, :] = u[::OVERSAMPLE][: NX_OUT - 1].tolist() + [u[0]]
        # column NX_OUT-1 is x=+1, identical to x=-1 on the periodic grid

    store(0, u_hat)
    substeps = 10
    for j in range(1, NT_OUT):
        dt = (t_out[j] - t_out[j - 1]) / substeps
        decay_half = np.exp(-NU * k * k * dt / 2.0)
        for _ in range(substeps):
            # integrating-factor RK4 (Kassam-Trefethen style splitting)
            a = rhs_advection(u_hat, k, mask)
            u1 = (u_hat + dt / 2.0 * a) * decay_half
            b = rhs_advection(u1, k, mask)
            u2 = u_hat * decay_half + dt / 2.0 * b
            c = rhs_advection(u2, k, mask)
            u3 = u_hat * decay_half * decay_half + dt * c * decay_half
            d = rhs_advection(u3, k, mask)
            u_hat = (
                u_hat * decay_half * decay_half
                + dt / 6.0 * (a * decay_half * decay_half
                              + 2.0 * (b + c) * decay_half
                              + d)
            )
        store(j, u_hat)
    return t_out, rows


def cole_hopf(x, t, nodes=220):
    """Gauss-Hermite evaluation of the exact Cole-Hopf solution."""
    z, w = np.polynomial.hermite.hermgauss(nodes)
    eta = np.sqrt(4.0 * NU * t) * z
    y = x - eta
    expo = -np.cos(np.pi * y) / (2.0 * np.pi * NU)
    expo -= expo.max()
    f = np.exp(expo)
    num = -np.sum(w * np.sin(np.pi * y) * f)
    den = np.sum(w * f)
    return num / den


def main():
    t_out, rows = solve()

    # cross-check away from the shock
    checks = [(-0.5, 0.25), (0.4, 0.5), (-0.7, 0.75), (0.25, 1.0), (-0.3, 0.1)]
    worst = 0.0
    for xc, tc in checks:
        it = int(round(tc * (NT_OUT - 1)))
        ix = int(round((xc + 1.0) / 2.0 * (NX_OUT - 1)))
        xg = -1.0 + 2.0 * ix / (NX_OUT - 1)
        ref = cole_hopf(xg, t_out[it])
        err = abs(rows[it, ix] - ref)
        worst = max(worst, err)
        print(f"check x={xg:+.4f} t={t_out[it]:.4f}: grid={rows[it, ix]:+.8f} "
              f"cole-hopf={ref:+.8f} diff={err:.2e}")
    print(f"worst deviation vs Cole-Hopf: {worst:.3e}")
    if worst > 1e-5:
        raise SystemExit("solver validation failed")

    with open("data/burgers_reference.csv", "w") as fh:
        fh.write("nx,nt,xmin,xmax,tmin,tmax\n")
        fh.write(f"{NX_OUT},{NT_OUT},-1,1,0,1\n")
        for j in range(NT_OUT):
            fh.write(",".join(f"{v:.12g}" for v in rows[j]) + "\n")
    print("wrote data/burgers_reference.csv")


if __name__ == "__main__":
    main()
