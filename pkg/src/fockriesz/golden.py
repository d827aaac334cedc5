"""Frozen regression constants.

Values marked "mpmath" were produced once by ``tools/golden_oracle.py``,
which shares no numerics with the package. The rest are measured sweeps.
Ceilings and bands are the measured value rounded outward.
"""

GOLDEN = {
    # log ||z^0||^2 at beta = 0.5 (mpmath)
    "moment_log_beta0.5_n0": 2.6879258864013077,
    # log of int_0^inf exp(2t - 2t^1.5) dt
    "radial_integral_log_beta0.5_n0": 0.6096357133280892,
    # log ||k_z||^2 at beta = 0.5, s = 2 (mpmath)
    "kernel_diag_beta0.5_s2": -0.75134058334276157,
    # normalized <k_(lambda_2), k_(lambda_3)> at beta = 0.5, theta = 0 (mpmath)
    "kernel_offdiag_beta0.5_l2_l3": 0.38110250384395419,
    # ceiling on sup - inf of (exact - estimate) over 100 log-moduli in [1, u_40]
    # (mpmath: 1902.47057366, 5.98252675036, 0.343490168371)
    "kernel_envelope_width": {"0.3": 1902.4706, "0.5": 5.9826, "0.7": 0.3435},
    # extreme eigenvalues of the 8-point reference Gram section, beta = 0.5 (mpmath)
    "gram_reference_M8_beta0.5": [0.11858192455648187, 2.0947943161425952],
    # cond(64) / cond(32) ceiling for the reference sequence
    "gram_reference_cond_ratio_max": 1.001,
    # ceiling on the envelope band for the reference sequence, 200 samples up
    # to e^(u_30), default report seed (mpmath: 3.27356219947185)
    "envelope_band_width_max": 3.2736,
    # band for ||g_n||^2, n <= 10, M = 40, beta = 0.5 (mpmath: 1.0005 .. 4.6802)
    "biorthogonal_norm_band": [1.0, 4.69],
    # bracket for -log|C_nm| / distance, distance >= 10, rotated reference sequence
    # (measured: 0.14352 .. 0.22339)
    "c_decay_bracket": [0.14, 0.225],
}
