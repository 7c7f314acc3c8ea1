"""Pure-Python Euler-Maruyama path loop.

Reference implementation of the trajectory kernel; blochfb._pathloop_c is
the compiled twin.  The two must stay operation-for-operation identical
(same groupings, same divisions) so that trajectories agree bitwise across
backends.  Any change here must be mirrored in the .pyx file.
"""

from __future__ import annotations

import math

CLAMP_PROJECT = 0
CLAMP_REJECT = 1


def integrate_path(
    x0, y0, z0,
    dt, n_steps,
    dW, retry,
    tab_delta, tab_gamma, tab_dt,
    omega0, m_meas, eta,
    clamp_mode,
    policy_kind, pol_dt, pol_a, pol_b, pol_c,
    out_states, out_controls,
):
    """Integrate one trajectory; fills out_states/out_controls in place.

    dW is overwritten at steps where the reject policy resampled, so on
    return it always holds the increments actually applied.  Returns
    (clamp_count, fail_index) with fail_index = -1 on success or the step
    at which the state became non-finite.
    """
    x = x0
    y = y0
    z = z0
    m_tab = tab_delta.shape[0]
    n_pol = pol_a.shape[0]
    n_retry = retry.shape[1] if retry.ndim == 2 else 0
    c_noise = math.sqrt(m_meas * eta)
    half_m = 0.5 * m_meas
    clamp_count = 0

    out_states[0, 0] = x
    out_states[0, 1] = y
    out_states[0, 2] = z

    for k in range(n_steps):
        t = k * dt

        # rates: linear interpolation on the uniform table grid
        pos = t / tab_dt
        i = int(pos)
        if i > m_tab - 2:
            i = m_tab - 2
        w = pos - i
        dlt = tab_delta[i] + w * (tab_delta[i + 1] - tab_delta[i])
        gam = tab_gamma[i] + w * (tab_gamma[i + 1] - tab_gamma[i])

        # control
        if policy_kind == 0:
            ux = 0.0
            uy = 0.0
        else:
            pos = t / pol_dt
            i = int(pos)
            if i >= n_pol - 1:
                if policy_kind == 1:
                    ux = pol_a[n_pol - 1]
                    uy = pol_b[n_pol - 1]
                else:
                    l1 = pol_a[n_pol - 1]
                    l2 = pol_b[n_pol - 1]
                    l3 = pol_c[n_pol - 1]
                    ux = l2 * z - l3 * y
                    uy = l3 * x - l1 * z
            else:
                w = pos - i
                if policy_kind == 1:
                    ux = pol_a[i] + w * (pol_a[i + 1] - pol_a[i])
                    uy = pol_b[i] + w * (pol_b[i + 1] - pol_b[i])
                else:
                    l1 = pol_a[i] + w * (pol_a[i + 1] - pol_a[i])
                    l2 = pol_b[i] + w * (pol_b[i + 1] - pol_b[i])
                    l3 = pol_c[i] + w * (pol_c[i + 1] - pol_c[i])
                    ux = l2 * z - l3 * y
                    uy = l3 * x - l1 * z
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
            if clamp_mode == CLAMP_REJECT and n_retry > 0:
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
                    r = 1.0 / math.sqrt(n2)
                    x1 = x1 * r
                    y1 = y1 * r
                    z1 = z1 * r
                clamp_count += 1
            else:
                r = 1.0 / math.sqrt(n2)
                x1 = x1 * r
                y1 = y1 * r
                z1 = z1 * r
                clamp_count += 1

        if not (math.isfinite(x1) and math.isfinite(y1) and math.isfinite(z1)):
            return clamp_count, k

        x = x1
        y = y1
        z = z1
        out_states[k + 1, 0] = x
        out_states[k + 1, 1] = y
        out_states[k + 1, 2] = z

    # control at the final grid point, for the record only
    t = n_steps * dt
    if policy_kind == 0:
        ux = 0.0
        uy = 0.0
    else:
        pos = t / pol_dt
        i = int(pos)
        if i >= n_pol - 1:
            if policy_kind == 1:
                ux = pol_a[n_pol - 1]
                uy = pol_b[n_pol - 1]
            else:
                l1 = pol_a[n_pol - 1]
                l2 = pol_b[n_pol - 1]
                l3 = pol_c[n_pol - 1]
                ux = l2 * z - l3 * y
                uy = l3 * x - l1 * z
        else:
            w = pos - i
            if policy_kind == 1:
                ux = pol_a[i] + w * (pol_a[i + 1] - pol_a[i])
                uy = pol_b[i] + w * (pol_b[i + 1] - pol_b[i])
            else:
                l1 = pol_a[i] + w * (pol_a[i + 1] - pol_a[i])
                l2 = pol_b[i] + w * (pol_b[i + 1] - pol_b[i])
                l3 = pol_c[i] + w * (pol_c[i + 1] - pol_c[i])
                ux = l2 * z - l3 * y
                uy = l3 * x - l1 * z
    out_controls[n_steps, 0] = ux
    out_controls[n_steps, 1] = uy

    return clamp_count, -1
