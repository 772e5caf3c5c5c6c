"""Frozen reference values. Do not regenerate these from foxfade itself.

Channel values come from mpmath (20 to 30 digits) using the physical
construction at the reference parameter set (alpha=2, eta=1, kappa=1, mu=2, p=3,
q=1, r_hat=1): R^2 = U + V with U = chi'^2(3, 3) / 12 and V = chi'^2(1, 1) / 4,
convolved by tanh-sinh quadrature. DPSK uses the closed form
0.5 * E[exp(-g R^2)], a product of two noncentral chi-square MGFs.
Special-function values come from mpmath directly.
"""

# specfun ----------------------------------------------------------------------------
LOG_GAMMA = {
    1.0: 0.0,
    0.5: 0.57236494292470008707,                    # ln sqrt(pi)
    complex(1, 2): complex(-1.8760787864309293, 0.12964631630978832),
    complex(0.1, -30): complex(-47.565423555699173, -71.406325063462139),
    complex(-2.5, 0.5): complex(-0.93508562129827748, -8.8709628852474592),
}
BESSEL_I = {
    (0.0, 0.0): 1.0,
    (0.5, 1.0): 0.93767488824548765,               # sqrt(2/pi) sinh(1)
    (1.0, 1.0): 0.56515910399248503,
    (0.5, 6.0): 65.705036916658277,
    (-0.5, 1.0): 1.2312002145929674,
    (1.5, 2.0): 1.0994731886331097,
    (0.25, 50.0): 2.9307027872246365e20,
    (2.0, 700.0): 1.5252262036997769e302,
}
LAGUERRE = {(0, 0.7, 3.0): 1.0, (1, 0.5, 2.0): -0.5, (2, 0.0, 1.0): -0.5}
HYP0F1_REG = {(2.0, 0.0): 1.0, (1.0, 1.0): 2.2795853023360673, (0.5, 0.0): 0.56418958354775629}

# reference channel ---------------------------------------------------------------------
REF_C0 = 5.62578207894090605      # 8 * 3^1.5 * e^-2
REF_PDF = {
    0.01: 5.62578181645257e-6,
    0.3: 0.147078345218799,
    1.0: 1.11557885575403,
    2.0: 0.0244646520014553,
}
REF_CDF = {
    0.3: 0.0112050235526171,
    1.0: 0.601079455706395,
    1.5: 0.939277081893085,
}
REF_DPSK = {       # avg SNR in dB -> average BER
    10: 0.012101359693146219,
    20: 0.00014028003933313664,
    30: 1.4064064453002525e-6,
}
