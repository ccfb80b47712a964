"""Numeric kernels for kinematics, momentum and flight integration.

Every function here is written against a flat packed-model representation
(see robot.PackedModel) in a numba-compilable subset of Python.  By default
the kernels are JIT compiled; setting the environment variable
SWINGOPT_DISABLE_NUMBA=1 before import runs the identical source as plain
Python over numpy arrays.  The analysis kernels execute the same operations
in the same order on both paths, so their results agree bitwise.  The four
fused optimizer kernels (_pose_pass through _residual_batch) compile with
fastmath, which licenses reassociation, so across backends they agree to
roundoff rather than bitwise.

Small fixed-size linear algebra is hand-rolled: a BLAS call costs more than
a 3x3 multiply at these sizes, and the flight integrator below sits inside
the optimizer's innermost finite-difference loop.
"""

import os

import numpy as np

if os.environ.get("SWINGOPT_DISABLE_NUMBA", "") == "1":
    BACKEND = "python"

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

else:
    try:
        from numba import njit

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a hard dependency
        BACKEND = "python"

        def njit(*args, **kwargs):
            if args and callable(args[0]):
                return args[0]
            return lambda f: f


@njit(cache=True)
def _mat3_mul(A, B, out):
    for i in range(3):
        for j in range(3):
            out[i, j] = A[i, 0] * B[0, j] + A[i, 1] * B[1, j] + A[i, 2] * B[2, j]


@njit(cache=True)
def _mat3_vec(A, v, out):
    for i in range(3):
        out[i] = A[i, 0] * v[0] + A[i, 1] * v[1] + A[i, 2] * v[2]


@njit(cache=True)
def _mat3_vec_t(A, v, out):
    """out = A.T @ v"""
    for i in range(3):
        out[i] = A[0, i] * v[0] + A[1, i] * v[1] + A[2, i] * v[2]


@njit(cache=True)
def _cross(a, b, out):
    out[0] = a[1] * b[2] - a[2] * b[1]
    out[1] = a[2] * b[0] - a[0] * b[2]
    out[2] = a[0] * b[1] - a[1] * b[0]


@njit(cache=True)
def _axis_rotation(axis, angle, out):
    """Rodrigues rotation about a unit axis."""
    c = np.cos(angle)
    s = np.sin(angle)
    t = 1.0 - c
    x, y, z = axis[0], axis[1], axis[2]
    out[0, 0] = c + t * x * x
    out[0, 1] = t * x * y - s * z
    out[0, 2] = t * x * z + s * y
    out[1, 0] = t * x * y + s * z
    out[1, 1] = c + t * y * y
    out[1, 2] = t * y * z - s * x
    out[2, 0] = t * x * z - s * y
    out[2, 1] = t * y * z + s * x
    out[2, 2] = c + t * z * z


@njit(cache=True)
def _solve3(A, b, out):
    """Solve A @ out = b for a well-conditioned 3x3 matrix (Cramer)."""
    a00, a01, a02 = A[0, 0], A[0, 1], A[0, 2]
    a10, a11, a12 = A[1, 0], A[1, 1], A[1, 2]
    a20, a21, a22 = A[2, 0], A[2, 1], A[2, 2]
    c00 = a11 * a22 - a12 * a21
    c01 = a12 * a20 - a10 * a22
    c02 = a10 * a21 - a11 * a20
    det = a00 * c00 + a01 * c01 + a02 * c02
    inv = 1.0 / det
    out[0] = (b[0] * c00 + a01 * (a12 * b[2] - a22 * b[1]) + a02 * (a21 * b[1] - a11 * b[2])) * inv
    out[1] = (b[0] * c01 + a00 * (a22 * b[1] - a12 * b[2]) + a02 * (a10 * b[2] - a20 * b[1])) * inv
    out[2] = (b[0] * c02 + a00 * (a11 * b[2] - a21 * b[1]) + a01 * (a20 * b[1] - a10 * b[2])) * inv


@njit(cache=True)
def _quat_to_mat(q, out):
    w, x, y, z = q[0], q[1], q[2], q[3]
    out[0, 0] = 1.0 - 2.0 * (y * y + z * z)
    out[0, 1] = 2.0 * (x * y - w * z)
    out[0, 2] = 2.0 * (x * z + w * y)
    out[1, 0] = 2.0 * (x * y + w * z)
    out[1, 1] = 1.0 - 2.0 * (x * x + z * z)
    out[1, 2] = 2.0 * (y * z - w * x)
    out[2, 0] = 2.0 * (x * z - w * y)
    out[2, 1] = 2.0 * (y * z + w * x)
    out[2, 2] = 1.0 - 2.0 * (x * x + y * y)


@njit(cache=True)
def _quat_step(q, w, dt):
    """Explicit Euler step of the quaternion rate under a world-frame rate.

    q <- normalize(q + 0.5*dt * (0, w) ⊗ q), in place.
    """
    qw, qx, qy, qz = q[0], q[1], q[2], q[3]
    dw = -(w[0] * qx + w[1] * qy + w[2] * qz)
    dx = qw * w[0] + w[1] * qz - w[2] * qy
    dy = qw * w[1] + w[2] * qx - w[0] * qz
    dz = qw * w[2] + w[0] * qy - w[1] * qx
    h = 0.5 * dt
    q[0] = qw + h * dw
    q[1] = qx + h * dx
    q[2] = qy + h * dy
    q[3] = qz + h * dz
    n = np.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])
    q[0] /= n
    q[1] /= n
    q[2] /= n
    q[3] /= n


@njit(cache=True)
def _poly_eval(gamma, t, out):
    """Evaluate each polynomial row at t (columns highest power first)."""
    n, m1 = gamma.shape
    for i in range(n):
        acc = gamma[i, 0]
        for c in range(1, m1):
            acc = acc * t + gamma[i, c]
        out[i] = acc


@njit(cache=True)
def _poly_rate(gamma, t, out):
    n, m1 = gamma.shape
    m = m1 - 1
    for i in range(n):
        if m == 0:
            out[i] = 0.0
            continue
        acc = gamma[i, 0] * m
        for c in range(1, m):
            acc = acc * t + gamma[i, c] * (m - c)
        out[i] = acc


@njit(cache=True)
def _fk(parent, jrot, jtrans, jaxis, qidx, Rb, q, R, P):
    """World rotation and origin of every body; base pinned at the origin."""
    for i in range(3):
        P[0, i] = 0.0
        for j in range(3):
            R[0, i, j] = Rb[i, j]
    tmp = np.empty((3, 3))
    rot = np.empty((3, 3))
    v = np.empty(3)
    for b in range(1, parent.shape[0]):
        par = parent[b]
        _mat3_vec(R[par], jtrans[b], v)
        for i in range(3):
            P[b, i] = P[par, i] + v[i]
        _mat3_mul(R[par], jrot[b], tmp)
        k = qidx[b]
        if k >= 0:
            _axis_rotation(jaxis[b], q[k], rot)
            _mat3_mul(tmp, rot, R[b])
        else:
            for i in range(3):
                for j in range(3):
                    R[b, i, j] = tmp[i, j]


@njit(cache=True)
def _body_coms(R, P, com, pc):
    v = np.empty(3)
    for b in range(R.shape[0]):
        _mat3_vec(R[b], com[b], v)
        for i in range(3):
            pc[b, i] = P[b, i] + v[i]


@njit(cache=True)
def _com_point(mass, pc, pg):
    total = 0.0
    pg[0] = 0.0
    pg[1] = 0.0
    pg[2] = 0.0
    for b in range(pc.shape[0]):
        m = mass[b]
        total += m
        for i in range(3):
            pg[i] += m * pc[b, i]
    for i in range(3):
        pg[i] /= total
    return total


@njit(cache=True)
def _world_inertia(R, I, out):
    """out = R @ I @ R.T"""
    tmp = np.empty((3, 3))
    _mat3_mul(R, I, tmp)
    for i in range(3):
        for j in range(3):
            out[i, j] = tmp[i, 0] * R[j, 0] + tmp[i, 1] * R[j, 1] + tmp[i, 2] * R[j, 2]


@njit(cache=True)
def _tree_velocities(parent, jaxis, qidx, R, P, vb, omega_b, qdot, w, vo):
    """Angular velocity of each body and velocity of each body origin.

    Body origins sit on their inboard joint axes, so the origin velocity
    propagates with the parent's angular velocity before the joint rate is
    added.
    """
    ax = np.empty(3)
    cr = np.empty(3)
    d = np.empty(3)
    for i in range(3):
        w[0, i] = omega_b[i]
        vo[0, i] = vb[i]
    for b in range(1, parent.shape[0]):
        par = parent[b]
        for i in range(3):
            d[i] = P[b, i] - P[par, i]
        _cross(w[par], d, cr)
        for i in range(3):
            vo[b, i] = vo[par, i] + cr[i]
            w[b, i] = w[par, i]
        k = qidx[b]
        if k >= 0:
            _mat3_vec(R[b], jaxis[b], ax)
            for i in range(3):
                w[b, i] += ax[i] * qdot[k]


@njit(cache=True)
def _momentum_sum(R, P, pc, mass, inertia, pg, w, vo, l_out, k_out, per_body_k, want_per_body):
    """Total linear and angular momentum about the CoM from body velocities."""
    Iw = np.empty((3, 3))
    vc = np.empty(3)
    d = np.empty(3)
    cr = np.empty(3)
    kb = np.empty(3)
    for i in range(3):
        l_out[i] = 0.0
        k_out[i] = 0.0
    for b in range(R.shape[0]):
        for i in range(3):
            d[i] = pc[b, i] - P[b, i]
        _cross(w[b], d, cr)
        for i in range(3):
            vc[i] = vo[b, i] + cr[i]
        _world_inertia(R[b], inertia[b], Iw)
        _mat3_vec(Iw, w[b], kb)
        for i in range(3):
            d[i] = pc[b, i] - pg[i]
        _cross(d, vc, cr)
        m = mass[b]
        for i in range(3):
            kb[i] += m * cr[i]
            l_out[i] += m * vc[i]
            k_out[i] += kb[i]
        if want_per_body:
            for i in range(3):
                per_body_k[b, i] = kb[i]


@njit(cache=True)
def _rotational_coupling(R, pc, mass, inertia, pg, A):
    """3x3 map from base angular velocity to angular momentum about the CoM.

    Accumulates sum_b [ R I R^T + m .((d.p) Id - p d^T) ] with d = pc - pg;
    equal to the composite inertia about the CoM up to roundoff.
    """
    Iw = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            A[i, j] = 0.0
    for b in range(R.shape[0]):
        _world_inertia(R[b], inertia[b], Iw)
        m = mass[b]
        d0 = pc[b, 0] - pg[0]
        d1 = pc[b, 1] - pg[1]
        d2 = pc[b, 2] - pg[2]
        p0 = pc[b, 0]
        p1 = pc[b, 1]
        p2 = pc[b, 2]
        dp = d0 * p0 + d1 * p1 + d2 * p2
        A[0, 0] += Iw[0, 0] + m * (dp - p0 * d0)
        A[0, 1] += Iw[0, 1] - m * p0 * d1
        A[0, 2] += Iw[0, 2] - m * p0 * d2
        A[1, 0] += Iw[1, 0] - m * p1 * d0
        A[1, 1] += Iw[1, 1] + m * (dp - p1 * d1)
        A[1, 2] += Iw[1, 2] - m * p1 * d2
        A[2, 0] += Iw[2, 0] - m * p2 * d0
        A[2, 1] += Iw[2, 1] - m * p2 * d1
        A[2, 2] += Iw[2, 2] + m * (dp - p2 * d2)


@njit(cache=True)
def _composite_inertia(R, pc, mass, inertia, pg, I_out):
    """Composite inertia about the CoM, world axes (parallel-axis form)."""
    Iw = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            I_out[i, j] = 0.0
    for b in range(R.shape[0]):
        _world_inertia(R[b], inertia[b], Iw)
        m = mass[b]
        d0 = pc[b, 0] - pg[0]
        d1 = pc[b, 1] - pg[1]
        d2 = pc[b, 2] - pg[2]
        dd = d0 * d0 + d1 * d1 + d2 * d2
        I_out[0, 0] += Iw[0, 0] + m * (dd - d0 * d0)
        I_out[0, 1] += Iw[0, 1] - m * d0 * d1
        I_out[0, 2] += Iw[0, 2] - m * d0 * d2
        I_out[1, 0] += Iw[1, 0] - m * d1 * d0
        I_out[1, 1] += Iw[1, 1] + m * (dd - d1 * d1)
        I_out[1, 2] += Iw[1, 2] - m * d1 * d2
        I_out[2, 0] += Iw[2, 0] - m * d2 * d0
        I_out[2, 1] += Iw[2, 1] - m * d2 * d1
        I_out[2, 2] += Iw[2, 2] + m * (dd - d2 * d2)


@njit(cache=True)
def _full_momentum_map(
    parent, jaxis, qidx, jbody, subtree, R, P, pc, mass, inertia, pg, lin, ang_bl, ang_ba, ang_j, icom
):
    """All column blocks of the momentum map plus the composite inertia.

    lin: 3 x (6+nq) linear rows; ang_bl/ang_ba: angular rows for base
    linear/angular velocity; ang_j: angular rows for joint rates.  Built by
    honest per-body accumulation so the structural zeros of ang_bl emerge
    from cancellation rather than by construction.
    """
    nb = R.shape[0]
    nq = jbody.shape[0]
    total = 0.0
    for b in range(nb):
        total += mass[b]
    # linear rows, base columns
    for i in range(3):
        for j in range(6 + nq):
            lin[i, j] = 0.0
        lin[i, 3 + i] = 0.0
        lin[i, i] = total
    # l = M vb + sum m w x pc = M vb - S(M pg) w
    lin[0, 4] = total * pg[2]
    lin[0, 5] = -total * pg[1]
    lin[1, 3] = -total * pg[2]
    lin[1, 5] = total * pg[0]
    lin[2, 3] = total * pg[1]
    lin[2, 4] = -total * pg[0]
    _rotational_coupling(R, pc, mass, inertia, pg, ang_ba)
    _composite_inertia(R, pc, mass, inertia, pg, icom)
    # angular rows, base linear columns: sum_b m S(pc - pg)
    for i in range(3):
        for j in range(3):
            ang_bl[i, j] = 0.0
    for b in range(nb):
        m = mass[b]
        d0 = pc[b, 0] - pg[0]
        d1 = pc[b, 1] - pg[1]
        d2 = pc[b, 2] - pg[2]
        ang_bl[0, 1] += -m * d2
        ang_bl[0, 2] += m * d1
        ang_bl[1, 0] += m * d2
        ang_bl[1, 2] += -m * d0
        ang_bl[2, 0] += -m * d1
        ang_bl[2, 1] += m * d0
    # joint columns
    ax = np.empty(3)
    r = np.empty(3)
    cr = np.empty(3)
    d = np.empty(3)
    Iw = np.empty((3, 3))
    col = np.empty(3)
    for j in range(nq):
        body = jbody[j]
        _mat3_vec(R[body], jaxis[body], ax)
        lin0 = 0.0
        lin1 = 0.0
        lin2 = 0.0
        col[0] = 0.0
        col[1] = 0.0
        col[2] = 0.0
        for b in range(nb):
            if subtree[j, b] == 0:
                continue
            m = mass[b]
            for i in range(3):
                r[i] = pc[b, i] - P[body, i]
            _cross(ax, r, cr)
            lin0 += m * cr[0]
            lin1 += m * cr[1]
            lin2 += m * cr[2]
            for i in range(3):
                d[i] = pc[b, i] - pg[i]
            _cross(d, cr, r)
            _world_inertia(R[b], inertia[b], Iw)
            for i in range(3):
                col[i] += Iw[i, 0] * ax[0] + Iw[i, 1] * ax[1] + Iw[i, 2] * ax[2] + m * r[i]
        lin[0, 6 + j] = lin0
        lin[1, 6 + j] = lin1
        lin[2, 6 + j] = lin2
        for i in range(3):
            ang_j[i, j] = col[i]


@njit(cache=True)
def _flight_terminal(
    parent,
    jrot,
    jtrans,
    jaxis,
    qidx,
    mass,
    com,
    inertia,
    theta0,
    omega0,
    gamma,
    t_f,
    N,
    stance_body,
    stance_off,
    swing_body,
    swing_off,
):
    """Integrate the flight-phase base orientation and read off terminal data.

    Angular momentum about the CoM is conserved in flight, so each step
    recomputes the rotational coupling at the current configuration and
    recovers the base rate from the conserved value before the next Euler
    step of the quaternion.

    Returns (theta_tf, omega_tf, k_flight, pg_tf, stance_rel, stance_relvel,
    swing_rel, total_mass).
    """
    nb = parent.shape[0]
    nq = gamma.shape[0]
    R = np.empty((nb, 3, 3))
    P = np.empty((nb, 3))
    pc = np.empty((nb, 3))
    w = np.empty((nb, 3))
    vo = np.empty((nb, 3))
    Rb = np.empty((3, 3))
    pg = np.empty(3)
    q = np.empty(nq)
    qd = np.empty(nq)
    vb0 = np.zeros(3)
    l = np.empty(3)
    kf = np.empty(3)
    kj = np.empty(3)
    rhs = np.empty(3)
    A = np.empty((3, 3))
    dummy = np.empty((1, 3))
    theta = theta0.copy()
    omega = omega0.copy()

    _poly_eval(gamma, 0.0, q)
    _poly_rate(gamma, 0.0, qd)
    _quat_to_mat(theta, Rb)
    _fk(parent, jrot, jtrans, jaxis, qidx, Rb, q, R, P)
    _body_coms(R, P, com, pc)
    total = _com_point(mass, pc, pg)
    _tree_velocities(parent, jaxis, qidx, R, P, vb0, omega, qd, w, vo)
    _momentum_sum(R, P, pc, mass, inertia, pg, w, vo, l, kf, dummy, False)

    dt = t_f / N
    for step in range(N):
        _quat_step(theta, omega, dt)
        t = (step + 1) * dt
        _poly_eval(gamma, t, q)
        _poly_rate(gamma, t, qd)
        _quat_to_mat(theta, Rb)
        _fk(parent, jrot, jtrans, jaxis, qidx, Rb, q, R, P)
        _body_coms(R, P, com, pc)
        _com_point(mass, pc, pg)
        # joint-rate part of the momentum: base at rest
        _tree_velocities(parent, jaxis, qidx, R, P, vb0, vb0, qd, w, vo)
        _momentum_sum(R, P, pc, mass, inertia, pg, w, vo, l, kj, dummy, False)
        _rotational_coupling(R, pc, mass, inertia, pg, A)
        for i in range(3):
            rhs[i] = kf[i] - kj[i]
        _solve3(A, rhs, omega)

    # terminal kinematic quantities at (theta(t_f), q(t_f))
    stance_rel = np.empty(3)
    swing_rel = np.empty(3)
    v = np.empty(3)
    _mat3_vec(R[stance_body], stance_off, v)
    for i in range(3):
        stance_rel[i] = P[stance_body, i] + v[i] - pg[i]
    _mat3_vec(R[swing_body], swing_off, v)
    for i in range(3):
        swing_rel[i] = P[swing_body, i] + v[i] - pg[i]
    # relative foot-vs-CoM velocity at touchdown:
    # point velocity = origin velocity + w x (point - origin), CoM velocity = l / M
    _tree_velocities(parent, jaxis, qidx, R, P, vb0, omega, qd, w, vo)
    _momentum_sum(R, P, pc, mass, inertia, pg, w, vo, l, kj, dummy, False)
    stance_relvel = np.empty(3)
    d = np.empty(3)
    cr = np.empty(3)
    _mat3_vec(R[stance_body], stance_off, d)
    _cross(w[stance_body], d, cr)
    for i in range(3):
        stance_relvel[i] = vo[stance_body, i] + cr[i] - l[i] / total
    return theta, omega, kf, pg.copy(), stance_rel, stance_relvel, swing_rel, total


@njit(cache=True)
def _liftoff_snapshot(
    parent,
    jrot,
    jtrans,
    jaxis,
    qidx,
    mass,
    com,
    inertia,
    theta0,
    omega0,
    gamma,
    stance_body,
    stance_off,
    swing_body,
    swing_off,
):
    """Kinematic/velocity quantities at the start of flight (no integration).

    Returns (swing_rel, swing_relvel, stance_rel, pg0, k_flight).
    """
    nb = parent.shape[0]
    nq = gamma.shape[0]
    R = np.empty((nb, 3, 3))
    P = np.empty((nb, 3))
    pc = np.empty((nb, 3))
    w = np.empty((nb, 3))
    vo = np.empty((nb, 3))
    Rb = np.empty((3, 3))
    pg = np.empty(3)
    q = np.empty(nq)
    qd = np.empty(nq)
    vb0 = np.zeros(3)
    l = np.empty(3)
    kf = np.empty(3)
    dummy = np.empty((1, 3))

    _poly_eval(gamma, 0.0, q)
    _poly_rate(gamma, 0.0, qd)
    _quat_to_mat(theta0, Rb)
    _fk(parent, jrot, jtrans, jaxis, qidx, Rb, q, R, P)
    _body_coms(R, P, com, pc)
    total = _com_point(mass, pc, pg)
    _tree_velocities(parent, jaxis, qidx, R, P, vb0, omega0, qd, w, vo)
    _momentum_sum(R, P, pc, mass, inertia, pg, w, vo, l, kf, dummy, False)

    v = np.empty(3)
    d = np.empty(3)
    cr = np.empty(3)
    swing_rel = np.empty(3)
    stance_rel = np.empty(3)
    swing_relvel = np.empty(3)
    _mat3_vec(R[swing_body], swing_off, v)
    for i in range(3):
        swing_rel[i] = P[swing_body, i] + v[i] - pg[i]
        d[i] = v[i]
    _cross(w[swing_body], d, cr)
    for i in range(3):
        swing_relvel[i] = vo[swing_body, i] + cr[i] - l[i] / total
    _mat3_vec(R[stance_body], stance_off, v)
    for i in range(3):
        stance_rel[i] = P[stance_body, i] + v[i] - pg[i]
    return swing_rel, swing_relvel, stance_rel, pg.copy(), kf


@njit(cache=True)
def _flight_log(
    parent,
    jrot,
    jtrans,
    jaxis,
    qidx,
    mass,
    com,
    inertia,
    theta0,
    omega0,
    gamma,
    t_f,
    N,
    theta_out,
    omega_out,
    k_out,
    per_body_k_out,
    q_out,
    qd_out,
):
    """Flight integration with a full per-sample record (N+1 rows).

    Row i holds the state at t = i*t_f/N: quaternion, base rate, the
    independently recomputed momentum (per-body velocity propagation) and
    its per-body decomposition, and the joint positions/rates.
    """
    nb = parent.shape[0]
    nq = gamma.shape[0]
    R = np.empty((nb, 3, 3))
    P = np.empty((nb, 3))
    pc = np.empty((nb, 3))
    w = np.empty((nb, 3))
    vo = np.empty((nb, 3))
    Rb = np.empty((3, 3))
    pg = np.empty(3)
    q = np.empty(nq)
    qd = np.empty(nq)
    vb0 = np.zeros(3)
    l = np.empty(3)
    kf = np.empty(3)
    kj = np.empty(3)
    ksum = np.empty(3)
    rhs = np.empty(3)
    A = np.empty((3, 3))
    dummy = np.empty((1, 3))
    theta = theta0.copy()
    omega = omega0.copy()

    dt = t_f / N
    for step in range(N + 1):
        t = step * dt
        if step > 0:
            _quat_step(theta, omega, dt)
        _poly_eval(gamma, t, q)
        _poly_rate(gamma, t, qd)
        _quat_to_mat(theta, Rb)
        _fk(parent, jrot, jtrans, jaxis, qidx, Rb, q, R, P)
        _body_coms(R, P, com, pc)
        _com_point(mass, pc, pg)
        if step > 0:
            _tree_velocities(parent, jaxis, qidx, R, P, vb0, vb0, qd, w, vo)
            _momentum_sum(R, P, pc, mass, inertia, pg, w, vo, l, kj, dummy, False)
            _rotational_coupling(R, pc, mass, inertia, pg, A)
            for i in range(3):
                rhs[i] = kf[i] - kj[i]
            _solve3(A, rhs, omega)
        # per-sample record with the recovered rate
        _tree_velocities(parent, jaxis, qidx, R, P, vb0, omega, qd, w, vo)
        _momentum_sum(R, P, pc, mass, inertia, pg, w, vo, l, ksum, per_body_k_out[step], True)
        if step == 0:
            for i in range(3):
                kf[i] = ksum[i]
        for i in range(4):
            theta_out[step, i] = theta[i]
        for i in range(3):
            omega_out[step, i] = omega[i]
            k_out[step, i] = ksum[i]
        for i in range(nq):
            q_out[step, i] = q[i]
            qd_out[step, i] = qd[i]
    return kf


@njit(cache=True, inline="always", fastmath=True)
def _pose_pass(parent, jrot, jtrans, jaxis, akind, asign, jident, qidx,
               mass, com, Rb, q, R, P, pc, pg):
    """FK, body CoM points and total CoM in one allocation-free pass.

    Scalar locals keep the inner loop free of temporaries; this runs once
    per integration step inside the optimizer's finite-difference probes.
    Joints whose axis lies exactly on a coordinate axis (akind 1/2/3 for
    x/y/z, asign carrying the direction) apply a sparse elementary
    rotation, and an identity joint-frame rotation (jident) skips a dense
    3x3 multiply; both shortcuts compute the same rotations as the
    general path.  Returns the total mass.
    """
    nb = parent.shape[0]
    for i in range(3):
        P[0, i] = 0.0
        for j in range(3):
            R[0, i, j] = Rb[i, j]
    for b in range(1, nb):
        par = parent[b]
        v0 = R[par, 0, 0] * jtrans[b, 0] + R[par, 0, 1] * jtrans[b, 1] + R[par, 0, 2] * jtrans[b, 2]
        v1 = R[par, 1, 0] * jtrans[b, 0] + R[par, 1, 1] * jtrans[b, 1] + R[par, 1, 2] * jtrans[b, 2]
        v2 = R[par, 2, 0] * jtrans[b, 0] + R[par, 2, 1] * jtrans[b, 1] + R[par, 2, 2] * jtrans[b, 2]
        P[b, 0] = P[par, 0] + v0
        P[b, 1] = P[par, 1] + v1
        P[b, 2] = P[par, 2] + v2
        if jident[b]:
            t00 = R[par, 0, 0]
            t01 = R[par, 0, 1]
            t02 = R[par, 0, 2]
            t10 = R[par, 1, 0]
            t11 = R[par, 1, 1]
            t12 = R[par, 1, 2]
            t20 = R[par, 2, 0]
            t21 = R[par, 2, 1]
            t22 = R[par, 2, 2]
        else:
            t00 = R[par, 0, 0] * jrot[b, 0, 0] + R[par, 0, 1] * jrot[b, 1, 0] + R[par, 0, 2] * jrot[b, 2, 0]
            t01 = R[par, 0, 0] * jrot[b, 0, 1] + R[par, 0, 1] * jrot[b, 1, 1] + R[par, 0, 2] * jrot[b, 2, 1]
            t02 = R[par, 0, 0] * jrot[b, 0, 2] + R[par, 0, 1] * jrot[b, 1, 2] + R[par, 0, 2] * jrot[b, 2, 2]
            t10 = R[par, 1, 0] * jrot[b, 0, 0] + R[par, 1, 1] * jrot[b, 1, 0] + R[par, 1, 2] * jrot[b, 2, 0]
            t11 = R[par, 1, 0] * jrot[b, 0, 1] + R[par, 1, 1] * jrot[b, 1, 1] + R[par, 1, 2] * jrot[b, 2, 1]
            t12 = R[par, 1, 0] * jrot[b, 0, 2] + R[par, 1, 1] * jrot[b, 1, 2] + R[par, 1, 2] * jrot[b, 2, 2]
            t20 = R[par, 2, 0] * jrot[b, 0, 0] + R[par, 2, 1] * jrot[b, 1, 0] + R[par, 2, 2] * jrot[b, 2, 0]
            t21 = R[par, 2, 0] * jrot[b, 0, 1] + R[par, 2, 1] * jrot[b, 1, 1] + R[par, 2, 2] * jrot[b, 2, 1]
            t22 = R[par, 2, 0] * jrot[b, 0, 2] + R[par, 2, 1] * jrot[b, 1, 2] + R[par, 2, 2] * jrot[b, 2, 2]
        k = qidx[b]
        if k >= 0:
            kind = akind[b]
            if kind == 2:
                c = np.cos(q[k])
                s = asign[b] * np.sin(q[k])
                R[b, 0, 0] = c * t00 - s * t02
                R[b, 0, 1] = t01
                R[b, 0, 2] = s * t00 + c * t02
                R[b, 1, 0] = c * t10 - s * t12
                R[b, 1, 1] = t11
                R[b, 1, 2] = s * t10 + c * t12
                R[b, 2, 0] = c * t20 - s * t22
                R[b, 2, 1] = t21
                R[b, 2, 2] = s * t20 + c * t22
            elif kind == 1:
                c = np.cos(q[k])
                s = asign[b] * np.sin(q[k])
                R[b, 0, 0] = t00
                R[b, 0, 1] = c * t01 + s * t02
                R[b, 0, 2] = c * t02 - s * t01
                R[b, 1, 0] = t10
                R[b, 1, 1] = c * t11 + s * t12
                R[b, 1, 2] = c * t12 - s * t11
                R[b, 2, 0] = t20
                R[b, 2, 1] = c * t21 + s * t22
                R[b, 2, 2] = c * t22 - s * t21
            elif kind == 3:
                c = np.cos(q[k])
                s = asign[b] * np.sin(q[k])
                R[b, 0, 0] = c * t00 + s * t01
                R[b, 0, 1] = c * t01 - s * t00
                R[b, 0, 2] = t02
                R[b, 1, 0] = c * t10 + s * t11
                R[b, 1, 1] = c * t11 - s * t10
                R[b, 1, 2] = t12
                R[b, 2, 0] = c * t20 + s * t21
                R[b, 2, 1] = c * t21 - s * t20
                R[b, 2, 2] = t22
            else:
                c = np.cos(q[k])
                s = np.sin(q[k])
                tt = 1.0 - c
                ax = jaxis[b, 0]
                ay = jaxis[b, 1]
                az = jaxis[b, 2]
                r00 = c + tt * ax * ax
                r01 = tt * ax * ay - s * az
                r02 = tt * ax * az + s * ay
                r10 = tt * ax * ay + s * az
                r11 = c + tt * ay * ay
                r12 = tt * ay * az - s * ax
                r20 = tt * ax * az - s * ay
                r21 = tt * ay * az + s * ax
                r22 = c + tt * az * az
                R[b, 0, 0] = t00 * r00 + t01 * r10 + t02 * r20
                R[b, 0, 1] = t00 * r01 + t01 * r11 + t02 * r21
                R[b, 0, 2] = t00 * r02 + t01 * r12 + t02 * r22
                R[b, 1, 0] = t10 * r00 + t11 * r10 + t12 * r20
                R[b, 1, 1] = t10 * r01 + t11 * r11 + t12 * r21
                R[b, 1, 2] = t10 * r02 + t11 * r12 + t12 * r22
                R[b, 2, 0] = t20 * r00 + t21 * r10 + t22 * r20
                R[b, 2, 1] = t20 * r01 + t21 * r11 + t22 * r21
                R[b, 2, 2] = t20 * r02 + t21 * r12 + t22 * r22
        else:
            R[b, 0, 0] = t00
            R[b, 0, 1] = t01
            R[b, 0, 2] = t02
            R[b, 1, 0] = t10
            R[b, 1, 1] = t11
            R[b, 1, 2] = t12
            R[b, 2, 0] = t20
            R[b, 2, 1] = t21
            R[b, 2, 2] = t22
    total = 0.0
    pg[0] = 0.0
    pg[1] = 0.0
    pg[2] = 0.0
    for b in range(nb):
        c0 = P[b, 0] + R[b, 0, 0] * com[b, 0] + R[b, 0, 1] * com[b, 1] + R[b, 0, 2] * com[b, 2]
        c1 = P[b, 1] + R[b, 1, 0] * com[b, 0] + R[b, 1, 1] * com[b, 1] + R[b, 1, 2] * com[b, 2]
        c2 = P[b, 2] + R[b, 2, 0] * com[b, 0] + R[b, 2, 1] * com[b, 1] + R[b, 2, 2] * com[b, 2]
        pc[b, 0] = c0
        pc[b, 1] = c1
        pc[b, 2] = c2
        m = mass[b]
        total += m
        pg[0] += m * c0
        pg[1] += m * c1
        pg[2] += m * c2
    pg[0] /= total
    pg[1] /= total
    pg[2] /= total
    return total


@njit(cache=True, inline="always", fastmath=True)
def _vel_pass(parent, jaxis, akind, asign, qidx, mass, inertia, R, P, pc, pg,
              wb0, wb1, wb2, qd, w, vo, A, want_A):
    """Body velocities plus the momentum they carry about the CoM.

    Base translational velocity is held at zero: every consumer reads
    either CoM-relative quantities or velocity differences, and a uniform
    base offset cancels from both.  With want_A the 3x3 coupling from base
    angular rate to angular momentum (composite inertia about the CoM) is
    accumulated into A in the same body order as the momentum.  Returns
    (k0, k1, k2, l0, l1, l2): angular momentum about the CoM and linear
    momentum.
    """
    nb = parent.shape[0]
    w[0, 0] = wb0
    w[0, 1] = wb1
    w[0, 2] = wb2
    vo[0, 0] = 0.0
    vo[0, 1] = 0.0
    vo[0, 2] = 0.0
    k0 = 0.0
    k1 = 0.0
    k2 = 0.0
    l0 = 0.0
    l1 = 0.0
    l2 = 0.0
    if want_A:
        for i in range(3):
            for j in range(3):
                A[i, j] = 0.0
    for b in range(nb):
        if b > 0:
            par = parent[b]
            d0 = P[b, 0] - P[par, 0]
            d1 = P[b, 1] - P[par, 1]
            d2 = P[b, 2] - P[par, 2]
            wp0 = w[par, 0]
            wp1 = w[par, 1]
            wp2 = w[par, 2]
            vo[b, 0] = vo[par, 0] + wp1 * d2 - wp2 * d1
            vo[b, 1] = vo[par, 1] + wp2 * d0 - wp0 * d2
            vo[b, 2] = vo[par, 2] + wp0 * d1 - wp1 * d0
            kq = qidx[b]
            if kq >= 0:
                kind = akind[b]
                if kind != 0:
                    # coordinate axis: the rotation leaves it on a column of R
                    col = kind - 1
                    sg = asign[b]
                    a0 = sg * R[b, 0, col]
                    a1 = sg * R[b, 1, col]
                    a2 = sg * R[b, 2, col]
                else:
                    a0 = R[b, 0, 0] * jaxis[b, 0] + R[b, 0, 1] * jaxis[b, 1] + R[b, 0, 2] * jaxis[b, 2]
                    a1 = R[b, 1, 0] * jaxis[b, 0] + R[b, 1, 1] * jaxis[b, 1] + R[b, 1, 2] * jaxis[b, 2]
                    a2 = R[b, 2, 0] * jaxis[b, 0] + R[b, 2, 1] * jaxis[b, 1] + R[b, 2, 2] * jaxis[b, 2]
                qk = qd[kq]
                w[b, 0] = wp0 + a0 * qk
                w[b, 1] = wp1 + a1 * qk
                w[b, 2] = wp2 + a2 * qk
            else:
                w[b, 0] = wp0
                w[b, 1] = wp1
                w[b, 2] = wp2
        wbx = w[b, 0]
        wby = w[b, 1]
        wbz = w[b, 2]
        db0 = pc[b, 0] - P[b, 0]
        db1 = pc[b, 1] - P[b, 1]
        db2 = pc[b, 2] - P[b, 2]
        vc0 = vo[b, 0] + wby * db2 - wbz * db1
        vc1 = vo[b, 1] + wbz * db0 - wbx * db2
        vc2 = vo[b, 2] + wbx * db1 - wby * db0
        # world inertia R I R^T, computed once and shared with the coupling
        m00 = R[b, 0, 0] * inertia[b, 0, 0] + R[b, 0, 1] * inertia[b, 1, 0] + R[b, 0, 2] * inertia[b, 2, 0]
        m01 = R[b, 0, 0] * inertia[b, 0, 1] + R[b, 0, 1] * inertia[b, 1, 1] + R[b, 0, 2] * inertia[b, 2, 1]
        m02 = R[b, 0, 0] * inertia[b, 0, 2] + R[b, 0, 1] * inertia[b, 1, 2] + R[b, 0, 2] * inertia[b, 2, 2]
        m10 = R[b, 1, 0] * inertia[b, 0, 0] + R[b, 1, 1] * inertia[b, 1, 0] + R[b, 1, 2] * inertia[b, 2, 0]
        m11 = R[b, 1, 0] * inertia[b, 0, 1] + R[b, 1, 1] * inertia[b, 1, 1] + R[b, 1, 2] * inertia[b, 2, 1]
        m12 = R[b, 1, 0] * inertia[b, 0, 2] + R[b, 1, 1] * inertia[b, 1, 2] + R[b, 1, 2] * inertia[b, 2, 2]
        m20 = R[b, 2, 0] * inertia[b, 0, 0] + R[b, 2, 1] * inertia[b, 1, 0] + R[b, 2, 2] * inertia[b, 2, 0]
        m21 = R[b, 2, 0] * inertia[b, 0, 1] + R[b, 2, 1] * inertia[b, 1, 1] + R[b, 2, 2] * inertia[b, 2, 1]
        m22 = R[b, 2, 0] * inertia[b, 0, 2] + R[b, 2, 1] * inertia[b, 1, 2] + R[b, 2, 2] * inertia[b, 2, 2]
        # R I R^T is symmetric (I symmetric), so mirror the lower triangle
        i00 = m00 * R[b, 0, 0] + m01 * R[b, 0, 1] + m02 * R[b, 0, 2]
        i01 = m00 * R[b, 1, 0] + m01 * R[b, 1, 1] + m02 * R[b, 1, 2]
        i02 = m00 * R[b, 2, 0] + m01 * R[b, 2, 1] + m02 * R[b, 2, 2]
        i10 = i01
        i11 = m10 * R[b, 1, 0] + m11 * R[b, 1, 1] + m12 * R[b, 1, 2]
        i12 = m10 * R[b, 2, 0] + m11 * R[b, 2, 1] + m12 * R[b, 2, 2]
        i20 = i02
        i21 = i12
        i22 = m20 * R[b, 2, 0] + m21 * R[b, 2, 1] + m22 * R[b, 2, 2]
        kb0 = i00 * wbx + i01 * wby + i02 * wbz
        kb1 = i10 * wbx + i11 * wby + i12 * wbz
        kb2 = i20 * wbx + i21 * wby + i22 * wbz
        dg0 = pc[b, 0] - pg[0]
        dg1 = pc[b, 1] - pg[1]
        dg2 = pc[b, 2] - pg[2]
        m = mass[b]
        kb0 += m * (dg1 * vc2 - dg2 * vc1)
        kb1 += m * (dg2 * vc0 - dg0 * vc2)
        kb2 += m * (dg0 * vc1 - dg1 * vc0)
        k0 += kb0
        k1 += kb1
        k2 += kb2
        l0 += m * vc0
        l1 += m * vc1
        l2 += m * vc2
        if want_A:
            p0 = pc[b, 0]
            p1 = pc[b, 1]
            p2 = pc[b, 2]
            dp = dg0 * p0 + dg1 * p1 + dg2 * p2
            A[0, 0] += i00 + m * (dp - p0 * dg0)
            A[0, 1] += i01 - m * p0 * dg1
            A[0, 2] += i02 - m * p0 * dg2
            A[1, 0] += i10 - m * p1 * dg0
            A[1, 1] += i11 + m * (dp - p1 * dg1)
            A[1, 2] += i12 - m * p1 * dg2
            A[2, 0] += i20 - m * p2 * dg0
            A[2, 1] += i21 - m * p2 * dg1
            A[2, 2] += i22 + m * (dp - p2 * dg2)
    return k0, k1, k2, l0, l1, l2


@njit(cache=True, fastmath=True)
def _eval_point(parent, jrot, jtrans, jaxis, akind, asign, jident, qidx,
                mass, com, inertia, theta0, omega0, gamma, t_f, N,
                stance_body, stance_off, swing_body, swing_off,
                R, P, pc, w, vo, q, qd, theta, omega, Rb, A, out):
    """Liftoff snapshot plus terminal flight quantities for one trajectory.

    All workspace comes from the caller so batched probing allocates
    nothing per point.  Writes 28 values into out:
    [0:4]   terminal base quaternion
    [4:7]   swing foot relative to CoM at liftoff
    [7:10]  swing foot velocity relative to CoM at liftoff
    [10:13] stance foot relative to CoM at liftoff
    [13:16] CoM at liftoff
    [16:19] stance foot relative to CoM at touchdown
    [19:22] stance foot velocity relative to CoM at touchdown
    [22:25] swing foot relative to CoM at touchdown
    [25:28] CoM at touchdown
    """
    for i in range(4):
        theta[i] = theta0[i]
    omega[0] = omega0[0]
    omega[1] = omega0[1]
    omega[2] = omega0[2]

    # liftoff pose and full-rate momentum; k is conserved through flight
    pg0 = out[13:16]
    _poly_eval(gamma, 0.0, q)
    _poly_rate(gamma, 0.0, qd)
    _quat_to_mat(theta, Rb)
    total = _pose_pass(parent, jrot, jtrans, jaxis, akind, asign, jident,
                       qidx, mass, com, Rb, q, R, P, pc, pg0)
    kf0, kf1, kf2, l0, l1, l2 = _vel_pass(
        parent, jaxis, akind, asign, qidx, mass, inertia, R, P, pc, pg0,
        omega[0], omega[1], omega[2], qd, w, vo, A, False)

    sb = swing_body
    v0 = R[sb, 0, 0] * swing_off[0] + R[sb, 0, 1] * swing_off[1] + R[sb, 0, 2] * swing_off[2]
    v1 = R[sb, 1, 0] * swing_off[0] + R[sb, 1, 1] * swing_off[1] + R[sb, 1, 2] * swing_off[2]
    v2 = R[sb, 2, 0] * swing_off[0] + R[sb, 2, 1] * swing_off[1] + R[sb, 2, 2] * swing_off[2]
    out[4] = P[sb, 0] + v0 - pg0[0]
    out[5] = P[sb, 1] + v1 - pg0[1]
    out[6] = P[sb, 2] + v2 - pg0[2]
    ws0 = w[sb, 0]
    ws1 = w[sb, 1]
    ws2 = w[sb, 2]
    out[7] = vo[sb, 0] + ws1 * v2 - ws2 * v1 - l0 / total
    out[8] = vo[sb, 1] + ws2 * v0 - ws0 * v2 - l1 / total
    out[9] = vo[sb, 2] + ws0 * v1 - ws1 * v0 - l2 / total
    tb = stance_body
    u0 = R[tb, 0, 0] * stance_off[0] + R[tb, 0, 1] * stance_off[1] + R[tb, 0, 2] * stance_off[2]
    u1 = R[tb, 1, 0] * stance_off[0] + R[tb, 1, 1] * stance_off[1] + R[tb, 1, 2] * stance_off[2]
    u2 = R[tb, 2, 0] * stance_off[0] + R[tb, 2, 1] * stance_off[1] + R[tb, 2, 2] * stance_off[2]
    out[10] = P[tb, 0] + u0 - pg0[0]
    out[11] = P[tb, 1] + u1 - pg0[1]
    out[12] = P[tb, 2] + u2 - pg0[2]

    # flight: Euler steps of the quaternion rate, the base rate recovered
    # each step from conservation of k about the CoM at the new pose
    pg_tf = out[25:28]
    dt = t_f / N
    for step in range(N):
        _quat_step(theta, omega, dt)
        t = (step + 1) * dt
        _poly_eval(gamma, t, q)
        _poly_rate(gamma, t, qd)
        _quat_to_mat(theta, Rb)
        total = _pose_pass(parent, jrot, jtrans, jaxis, akind, asign, jident,
                           qidx, mass, com, Rb, q, R, P, pc, pg_tf)
        kj0, kj1, kj2, l0, l1, l2 = _vel_pass(
            parent, jaxis, akind, asign, qidx, mass, inertia, R, P, pc, pg_tf,
            0.0, 0.0, 0.0, qd, w, vo, A, True)
        b0 = kf0 - kj0
        b1 = kf1 - kj1
        b2 = kf2 - kj2
        a00 = A[0, 0]
        a01 = A[0, 1]
        a02 = A[0, 2]
        a10 = A[1, 0]
        a11 = A[1, 1]
        a12 = A[1, 2]
        a20 = A[2, 0]
        a21 = A[2, 1]
        a22 = A[2, 2]
        c00 = a11 * a22 - a12 * a21
        c01 = a12 * a20 - a10 * a22
        c02 = a10 * a21 - a11 * a20
        det = a00 * c00 + a01 * c01 + a02 * c02
        inv = 1.0 / det
        omega[0] = (b0 * c00 + a01 * (a12 * b2 - a22 * b1) + a02 * (a21 * b1 - a11 * b2)) * inv
        omega[1] = (b0 * c01 + a00 * (a22 * b1 - a12 * b2) + a02 * (a10 * b2 - a20 * b1)) * inv
        omega[2] = (b0 * c02 + a00 * (a11 * b2 - a21 * b1) + a01 * (a20 * b1 - a10 * b2)) * inv

    out[0] = theta[0]
    out[1] = theta[1]
    out[2] = theta[2]
    out[3] = theta[3]
    u0 = R[tb, 0, 0] * stance_off[0] + R[tb, 0, 1] * stance_off[1] + R[tb, 0, 2] * stance_off[2]
    u1 = R[tb, 1, 0] * stance_off[0] + R[tb, 1, 1] * stance_off[1] + R[tb, 1, 2] * stance_off[2]
    u2 = R[tb, 2, 0] * stance_off[0] + R[tb, 2, 1] * stance_off[1] + R[tb, 2, 2] * stance_off[2]
    out[16] = P[tb, 0] + u0 - pg_tf[0]
    out[17] = P[tb, 1] + u1 - pg_tf[1]
    out[18] = P[tb, 2] + u2 - pg_tf[2]
    v0 = R[sb, 0, 0] * swing_off[0] + R[sb, 0, 1] * swing_off[1] + R[sb, 0, 2] * swing_off[2]
    v1 = R[sb, 1, 0] * swing_off[0] + R[sb, 1, 1] * swing_off[1] + R[sb, 1, 2] * swing_off[2]
    v2 = R[sb, 2, 0] * swing_off[0] + R[sb, 2, 1] * swing_off[1] + R[sb, 2, 2] * swing_off[2]
    out[22] = P[sb, 0] + v0 - pg_tf[0]
    out[23] = P[sb, 1] + v1 - pg_tf[1]
    out[24] = P[sb, 2] + v2 - pg_tf[2]
    # touchdown relative velocity of the stance foot under the full rates
    k0, k1, k2, l0, l1, l2 = _vel_pass(
        parent, jaxis, akind, asign, qidx, mass, inertia, R, P, pc, pg_tf,
        omega[0], omega[1], omega[2], qd, w, vo, A, False)
    wt0 = w[tb, 0]
    wt1 = w[tb, 1]
    wt2 = w[tb, 2]
    out[19] = vo[tb, 0] + wt1 * u2 - wt2 * u1 - l0 / total
    out[20] = vo[tb, 1] + wt2 * u0 - wt0 * u2 - l1 / total
    out[21] = vo[tb, 2] + wt0 * u1 - wt1 * u0 - l2 / total


@njit(cache=True, fastmath=True)
def _residual_batch(parent, jrot, jtrans, jaxis, akind, asign, jident, qidx,
                    mass, com, inertia, theta0, omega0, gammas, t_f, N,
                    stance_body, stance_off, swing_body, swing_off,
                    R, P, pc, w, vo, q, qd, theta, omega, Rb, A, out):
    """Fused liftoff and terminal evaluation for a stack of trajectories.

    gammas is (B, n, m+1) and out is (B, 28) laid out per _eval_point.
    One caller-owned workspace serves every point, so batched gradient
    probes pay only arithmetic.
    """
    for bi in range(gammas.shape[0]):
        _eval_point(parent, jrot, jtrans, jaxis, akind, asign, jident, qidx,
                    mass, com, inertia, theta0, omega0, gammas[bi], t_f, N,
                    stance_body, stance_off, swing_body, swing_off,
                    R, P, pc, w, vo, q, qd, theta, omega, Rb, A, out[bi])


def make_workspace(nb, nq):
    """Workspace array bundle for _residual_batch, allocated once per solve."""
    return (
        np.empty((nb, 3, 3)),
        np.empty((nb, 3)),
        np.empty((nb, 3)),
        np.empty((nb, 3)),
        np.empty((nb, 3)),
        np.empty(nq),
        np.empty(nq),
        np.empty(4),
        np.empty(3),
        np.empty((3, 3)),
        np.empty((3, 3)),
    )


def warmup(packed):
    """Force compilation of every kernel against a packed model's dtypes."""
    gamma = np.zeros((packed.nq, 4))
    theta0 = np.array([1.0, 0.0, 0.0, 0.0])
    omega0 = np.zeros(3)
    _flight_terminal(
        packed.parent,
        packed.jrot,
        packed.jtrans,
        packed.jaxis,
        packed.qidx,
        packed.mass,
        packed.com,
        packed.inertia,
        theta0,
        omega0,
        gamma,
        0.1,
        2,
        0,
        np.zeros(3),
        0,
        np.zeros(3),
    )
    _liftoff_snapshot(
        packed.parent,
        packed.jrot,
        packed.jtrans,
        packed.jaxis,
        packed.qidx,
        packed.mass,
        packed.com,
        packed.inertia,
        theta0,
        omega0,
        gamma,
        0,
        np.zeros(3),
        0,
        np.zeros(3),
    )
    nb = packed.nb
    _flight_log(
        packed.parent,
        packed.jrot,
        packed.jtrans,
        packed.jaxis,
        packed.qidx,
        packed.mass,
        packed.com,
        packed.inertia,
        theta0,
        omega0,
        gamma,
        0.1,
        2,
        np.empty((3, 4)),
        np.empty((3, 3)),
        np.empty((3, 3)),
        np.empty((3, nb, 3)),
        np.empty((3, packed.nq)),
        np.empty((3, packed.nq)),
    )
    ws = make_workspace(nb, packed.nq)
    _residual_batch(
        packed.parent,
        packed.jrot,
        packed.jtrans,
        packed.jaxis,
        packed.jaxis_kind,
        packed.jaxis_sign,
        packed.jrot_ident,
        packed.qidx,
        packed.mass,
        packed.com,
        packed.inertia,
        theta0,
        omega0,
        np.zeros((1, packed.nq, 4)),
        0.1,
        2,
        0,
        np.zeros(3),
        0,
        np.zeros(3),
        *ws,
        np.empty((1, 28)),
    )
