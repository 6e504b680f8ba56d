"""Chebyshev coefficients for exp(x) * sqrt(x) * K_nu(x) on x >= 2.

Expansion variable is s = 4/x - 1, which maps [2, inf) onto (-1, 1].
Generated at 50 significant digits with mpmath and truncated below 1e-18.
"""

K0_ASYMPTOTIC = (
    1.2201515410329777273,
    -3.1448101311964500543e-2,
    1.5698838857300533749e-3,
    -1.2849549581627802638e-4,
    1.3949813718876499364e-5,
    -1.8317555227191194848e-6,
    2.7668136394450150761e-7,
    -4.6604898976879476656e-8,
    8.5740340174142260858e-9,
    -1.6975345093890615156e-9,
    3.5773972814003284472e-10,
    -7.9574892444773970377e-11,
    1.855949114954926555e-11,
    -4.5145978833745191751e-12,
    1.1403405882073442347e-12,
    -2.9800969231481783548e-13,
    8.0328907750683743694e-14,
    -2.2275133267462963604e-14,
    6.3400764762766459661e-15,
    -1.8485933779209071694e-15,
    5.5120559994043333649e-16,
    -1.6782311257549006383e-16,
    5.2103917776435541125e-17,
    -1.6475805939842632815e-17,
    5.3004337711773357703e-18,
    -1.7331712005821000263e-18,
)
K1_ASYMPTOTIC = (
    1.3603130952422213347,
    1.0392373657681723844e-1,
    -2.8578168596227793868e-3,
    1.9521551847135163111e-4,
    -1.93619797416608296e-5,
    2.4064849478372171171e-6,
    -3.5019606030878125421e-7,
    5.7410841254500492923e-8,
    -1.0345762465678097027e-8,
    2.0150497551970346161e-9,
    -4.1903547593419255842e-10,
    9.2183151876053141258e-11,
    -2.1299678384277910216e-11,
    5.1396396734823435404e-12,
    -1.2891739609498229352e-12,
    3.3484196660522431201e-13,
    -8.9767051820101460692e-14,
    2.4771544242195986813e-14,
    -7.0198370892147688513e-15,
    2.0387031662398608799e-15,
    -6.0570472706430178228e-16,
    1.8380935752430454256e-16,
    -5.6894628491936483742e-17,
    1.7940510478863572914e-17,
    -5.7567444820733024496e-18,
    1.8778651901623267386e-18,
)
