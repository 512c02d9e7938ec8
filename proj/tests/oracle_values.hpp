#pragma once
// Reference values from tests/oracle/derive_values.py (mpmath, 40 digits).

namespace oracle {

// joint [(.4, .1), (.1, .4)]
inline constexpr double kMixedShannonMi = 0.19274475702175743;
inline constexpr double kMixedH2xy = 0.91686525662577905;
inline constexpr double kMixedMi2 = 0.46942910449411157;
inline constexpr double kMixedKappa2 = 0.51199355750668420;

struct ProfileRow {
  int n;
  double h_x, h_y, h_xy, mi, kappa;
};
inline constexpr ProfileRow kMixedProfile[] = {
    {1, 0.693147180559945309, 0.693147180559945309, 1.19354960409813319, 0.19274475702175743,
     0.16148868581578452},
    {2, 0.693147180559945309, 0.693147180559945309, 0.91686525662577905, 0.46942910449411157,
     0.51199355750668420},
    {3, 0.693147180559945309, 0.693147180559945309, 0.77263418376298244, 0.61366017735690818,
     0.79424414587532409},
    {4, 0.693147180559945309, 0.693147180559945309, 0.71862238690742972, 0.66767197421246090,
     0.92909988107351842},
};

inline constexpr double kEntropyFourFifths = 0.50040242353818788;  // H(4/5, 1/5)

inline constexpr double kGeometricHalfEntropy = 1.3862943611198906;  // 2 ln 2
inline constexpr double kGeometricHalfPartial10 = 1.3781715425977038;
inline constexpr double kGeometricHalfPartial20 = 1.3862798183132917;
inline constexpr double kGeometricHalfPartial40 = 1.3862943610934132;

// p_k = c / (k ln^2 k), k >= 3
inline constexpr double kLogSquaredNormalizerSum = 1.0690583107340880755;
inline constexpr double kLogSquaredC = 0.93540267164036361395;
inline constexpr double kLogSquaredEta[] = {
    0.0,  // unused
    1.0,
    0.092973415246809951,
    0.019623310492140230,
    0.0047085523285176102,
    0.0011796365396489897,
    0.00030065968066717123,
};
inline constexpr double kLogSquaredH2 = 1.0147125731561347612;

// diagonal joint over LogSquared
inline constexpr double kDiagonalMi2 = 1.01471257315613476;
// odd/even two-row joint over LogSquared
inline constexpr double kOddEvenEta2Odd = 0.074278566177474468;
inline constexpr double kOddEvenEta2Even = 0.018694849069335483;
inline constexpr double kOddEvenMi2 = 0.50189234199039017;
inline constexpr double kOddEvenKappa2 = 0.49461527852100787;

struct PerturbedRow {
  long m;
  double l2, mi2, kappa2;
};
inline constexpr PerturbedRow kPerturbed[] = {
    {1, 0.58563932180721092, 1.0147125731561348, 1.0},
    {10, 0.058563932180721092, 0.033822939894685684, 0.023923738777560311},
    {100, 0.0058563932180721092, 0.00046268169866137474, 0.00033365559699688440},
};

}  // namespace oracle
