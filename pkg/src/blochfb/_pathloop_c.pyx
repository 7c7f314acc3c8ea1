# cython: boundscheck=False, wraparound=False, cdivision=False
"""Compiled Euler-Maruyama path loop.

Operation-for-operation twin of blochfb._pathloop.integrate_path; compiled
with -ffp-contract=off and without fast-math so results match the pure
Python loop bitwise.  Keep the two in lockstep.
"""

from libc.math cimport isfinite, sqrt


cdef inline void _policy_eval(
    int policy_kind, double t, double pol_dt, Py_ssize_t n_pol,
    const double[::1] pol_a, const double[::1] pol_b, const double[::1] pol_c,
    double x, double y, double z, double* ux, double* uy,
) noexcept nogil:
    cdef double pos, w, l1, l2, l3
    cdef Py_ssize_t i
    if policy_kind == 0:
        ux[0] = 0.0
        uy[0] = 0.0
        return
    pos = t / pol_dt
    i = <Py_ssize_t>pos
    if i >= n_pol - 1:
        if policy_kind == 1:
            ux[0] = pol_a[n_pol - 1]
            uy[0] = pol_b[n_pol - 1]
        else:
            l1 = pol_a[n_pol - 1]
            l2 = pol_b[n_pol - 1]
            l3 = pol_c[n_pol - 1]
            ux[0] = l2 * z - l3 * y
            uy[0] = l3 * x - l1 * z
    else:
        w = pos - i
        if policy_kind == 1:
            ux[0] = pol_a[i] + w * (pol_a[i + 1] - pol_a[i])
            uy[0] = pol_b[i] + w * (pol_b[i + 1] - pol_b[i])
        else:
            l1 = pol_a[i] + w * (pol_a[i + 1] - pol_a[i])
            l2 = pol_b[i] + w * (pol_b[i + 1] - pol_b[i])
            l3 = pol_c[i] + w * (pol_c[i + 1] - pol_c[i])
            ux[0] = l2 * z - l3 * y
            uy[0] = l3 * x - l1 * z


def integrate_path(
    double x0, double y0, double z0,
    double dt, Py_ssize_t n_steps,
    double[::1] dW, const double[:, ::1] retry,
    const double[::1] tab_delta, const double[::1] tab_gamma, double tab_dt,
    double omega0, double m_meas, double eta,
    int clamp_mode,
    int policy_kind, double pol_dt,
    const double[::1] pol_a, const double[::1] pol_b, const double[::1] pol_c,
    double[:, ::1] out_states, double[:, ::1] out_controls,
):
    """See blochfb._pathloop.integrate_path."""
    cdef double x = x0
    cdef double y = y0
    cdef double z = z0
    cdef Py_ssize_t m_tab = tab_delta.shape[0]
    cdef Py_ssize_t n_pol = pol_a.shape[0]
    cdef Py_ssize_t n_retry = retry.shape[1]
    cdef double c_noise = sqrt(m_meas * eta)
    cdef double half_m = 0.5 * m_meas
    cdef long clamp_count = 0
    cdef Py_ssize_t fail_index = -1

    cdef Py_ssize_t k, i, att
    cdef double t, pos, w, dlt, gam, ux, uy
    cdef double fx, fy, fz, gx, gy, gz, dw, x1, y1, z1, n2, r

    with nogil:
        out_states[0, 0] = x
        out_states[0, 1] = y
        out_states[0, 2] = z

        for k in range(n_steps):
            t = k * dt

            pos = t / tab_dt
            i = <Py_ssize_t>pos
            if i > m_tab - 2:
                i = m_tab - 2
            w = pos - i
            dlt = tab_delta[i] + w * (tab_delta[i + 1] - tab_delta[i])
            gam = tab_gamma[i] + w * (tab_gamma[i + 1] - tab_gamma[i])

            _policy_eval(policy_kind, t, pol_dt, n_pol, pol_a, pol_b, pol_c,
                         x, y, z, &ux, &uy)
            out_controls[k, 0] = ux
            out_controls[k, 1] = uy

            fx = -dlt * x - half_m * x - omega0 * y + uy * z
            fy = omega0 * x - dlt * y - half_m * y - ux * z
            fz = -uy * x + ux * y - 2.0 * dlt * z - 2.0 * gam
            gx = c_noise * x * z
            gy = c_noise * y * z
            gz = c_noise * (z * z - 1.0)

            dw = dW[k]
            x1 = x + fx * dt + gx * dw
            y1 = y + fy * dt + gy * dw
            z1 = z + fz * dt + gz * dw
            n2 = x1 * x1 + y1 * y1 + z1 * z1

            if n2 > 1.0:
                if clamp_mode == 1 and n_retry > 0:
                    att = 0
                    while n2 > 1.0 and att < n_retry:
                        dw = retry[k, att]
                        x1 = x + fx * dt + gx * dw
                        y1 = y + fy * dt + gy * dw
                        z1 = z + fz * dt + gz * dw
                        n2 = x1 * x1 + y1 * y1 + z1 * z1
                        att += 1
                    dW[k] = dw
                    if n2 > 1.0:
                        r = 1.0 / sqrt(n2)
                        x1 = x1 * r
                        y1 = y1 * r
                        z1 = z1 * r
                    clamp_count += 1
                else:
                    r = 1.0 / sqrt(n2)
                    x1 = x1 * r
                    y1 = y1 * r
                    z1 = z1 * r
                    clamp_count += 1

            if not (isfinite(x1) and isfinite(y1) and isfinite(z1)):
                fail_index = k
                break

            x = x1
            y = y1
            z = z1
            out_states[k + 1, 0] = x
            out_states[k + 1, 1] = y
            out_states[k + 1, 2] = z

        if fail_index < 0:
            t = n_steps * dt
            _policy_eval(policy_kind, t, pol_dt, n_pol, pol_a, pol_b, pol_c,
                         x, y, z, &ux, &uy)
            out_controls[n_steps, 0] = ux
            out_controls[n_steps, 1] = uy

    return clamp_count, fail_index
