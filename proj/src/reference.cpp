#include "liexp/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "liexp/errors.hpp"

// Explicit Runge-Kutta 8(5,3) pair of Dormand & Prince (the dop853 tableau)
// applied to matrix-valued right-hand sides. Dense output is not needed here:
// the driver clips every step so it lands exactly on the sample grid.

namespace liexp {

namespace {

constexpr double c2 = 0.526001519587677318785587544488e-01;
constexpr double c3 = 0.789002279381515978178381316732e-01;
constexpr double c4 = 0.118350341907227396726757197510e+00;
constexpr double c5 = 0.281649658092772603273242802490e+00;
constexpr double c6 = 0.333333333333333333333333333333e+00;
constexpr double c7 = 0.25e+00;
constexpr double c8 = 0.307692307692307692307692307692e+00;
constexpr double c9 = 0.651282051282051282051282051282e+00;
constexpr double c10 = 0.6e+00;
constexpr double c11 = 0.857142857142857142857142857142e+00;

constexpr double a21 = 5.26001519587677318785587544488e-2;
constexpr double a31 = 1.97250569845378994544595329183e-2;
constexpr double a32 = 5.91751709536136983633785987549e-2;
constexpr double a41 = 2.95875854768068491816892993775e-2;
constexpr double a43 = 8.87627564304205475450678981324e-2;
constexpr double a51 = 2.41365134159266685502369798665e-1;
constexpr double a53 = -8.84549479328286085344864962717e-1;
constexpr double a54 = 9.24834003261792003115737966543e-1;
constexpr double a61 = 3.7037037037037037037037037037e-2;
constexpr double a64 = 1.70828608729473871279604482173e-1;
constexpr double a65 = 1.25467687566822425016691814123e-1;
constexpr double a71 = 3.7109375e-2;
constexpr double a74 = 1.70252211019544039314978060272e-1;
constexpr double a75 = 6.02165389804559606850219397283e-2;
constexpr double a76 = -1.7578125e-2;
constexpr double a81 = 3.70920001185047927108779319836e-2;
constexpr double a84 = 1.70383925712239993810214054705e-1;
constexpr double a85 = 1.07262030446373284651809199168e-1;
constexpr double a86 = -1.53194377486244017527936158236e-2;
constexpr double a87 = 8.27378916381402288758473766002e-3;
constexpr double a91 = 6.24110958716075717114429577812e-1;
constexpr double a94 = -3.36089262944694129406857109825e0;
constexpr double a95 = -8.68219346841726006818189891453e-1;
constexpr double a96 = 2.75920996994467083049415600797e1;
constexpr double a97 = 2.01540675504778934086186788979e1;
constexpr double a98 = -4.34898841810699588477366255144e1;
constexpr double a101 = 4.77662536438264365890433908527e-1;
constexpr double a104 = -2.48811461997166764192642586468e0;
constexpr double a105 = -5.90290826836842996371446475743e-1;
constexpr double a106 = 2.12300514481811942347288949897e1;
constexpr double a107 = 1.52792336328824235832596922938e1;
constexpr double a108 = -3.32882109689848629194453265587e1;
constexpr double a109 = -2.03312017085086261358222928593e-2;
constexpr double a111 = -9.3714243008598732571704021658e-1;
constexpr double a114 = 5.18637242884406370830023853209e0;
constexpr double a115 = 1.09143734899672957818500254654e0;
constexpr double a116 = -8.14978701074692612513997267357e0;
constexpr double a117 = -1.85200656599969598641566180701e1;
constexpr double a118 = 2.27394870993505042818970056734e1;
constexpr double a119 = 2.49360555267965238987089396762e0;
constexpr double a1110 = -3.0467644718982195003823669022e0;
constexpr double a121 = 2.27331014751653820792359768449e0;
constexpr double a124 = -1.05344954667372501984066689879e1;
constexpr double a125 = -2.00087205822486249909675718444e0;
constexpr double a126 = -1.79589318631187989172765950534e1;
constexpr double a127 = 2.79488845294199600508499808837e1;
constexpr double a128 = -2.85899827713502369474065508674e0;
constexpr double a129 = -8.87285693353062954433549289258e0;
constexpr double a1210 = 1.23605671757943030647266201528e1;
constexpr double a1211 = 6.43392746015763530355970484046e-1;

constexpr double b1 = 5.42937341165687622380535766363e-2;
constexpr double b6 = 4.45031289275240888144113950566e0;
constexpr double b7 = 1.89151789931450038304281599044e0;
constexpr double b8 = -5.8012039600105847814672114227e0;
constexpr double b9 = 3.1116436695781989440891606237e-1;
constexpr double b10 = -1.52160949662516078556178806805e-1;
constexpr double b11 = 2.01365400804030348374776537501e-1;
constexpr double b12 = 4.47106157277725905176885569043e-2;

// embedded 3rd-order error weights
constexpr double e31 = 0.244094488188976377952755905512e+00;
constexpr double e32 = 0.733846688281611857341361741547e+00;
constexpr double e33 = 0.220588235294117647058823529412e-01;

// embedded 5th-order error weights
constexpr double e51 = 0.1312004499419488073250102996e-01;
constexpr double e56 = -0.1225156446376204440720569753e+01;
constexpr double e57 = -0.4957589496572501915214079952e+00;
constexpr double e58 = 0.1664377182454986536961530415e+01;
constexpr double e59 = -0.3503288487499736816886487290e+00;
constexpr double e510 = 0.3341791187130174790297318841e+00;
constexpr double e511 = 0.8192320648511571246570742613e-01;
constexpr double e512 = -0.2235530786388629525884427845e-01;

struct Stepper {
  const GeneratorFn& a;
  int d;
  double atol, rtol;

  ComplexMatrix k1, k2, k3, k4, k5, k6, k7, k8, k9, k10, k11, k12, yw;

  Stepper(const GeneratorFn& fn, int dim, double tol) : a(fn), d(dim), atol(tol), rtol(tol) {}

  ComplexMatrix deriv(double t, const ComplexMatrix& y) { return a(t) * y; }

  // One trial step of size h from (t, y); fills yw with the 8th-order result
  // and returns the stretched error of the embedded 5(3) estimates.
  double try_step(double t, const ComplexMatrix& y, double h) {
    k2 = deriv(t + c2 * h, y + h * (a21 * k1));
    k3 = deriv(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    k4 = deriv(t + c4 * h, y + h * (a41 * k1 + a43 * k3));
    k5 = deriv(t + c5 * h, y + h * (a51 * k1 + a53 * k3 + a54 * k4));
    k6 = deriv(t + c6 * h, y + h * (a61 * k1 + a64 * k4 + a65 * k5));
    k7 = deriv(t + c7 * h, y + h * (a71 * k1 + a74 * k4 + a75 * k5 + a76 * k6));
    k8 = deriv(t + c8 * h, y + h * (a81 * k1 + a84 * k4 + a85 * k5 + a86 * k6 + a87 * k7));
    k9 = deriv(t + c9 * h, y + h * (a91 * k1 + a94 * k4 + a95 * k5 + a96 * k6 + a97 * k7 + a98 * k8));
    k10 = deriv(t + c10 * h,
                y + h * (a101 * k1 + a104 * k4 + a105 * k5 + a106 * k6 + a107 * k7 + a108 * k8 + a109 * k9));
    k11 = deriv(t + c11 * h, y + h * (a111 * k1 + a114 * k4 + a115 * k5 + a116 * k6 + a117 * k7 + a118 * k8 +
                                      a119 * k9 + a1110 * k10));
    k12 = deriv(t + h, y + h * (a121 * k1 + a124 * k4 + a125 * k5 + a126 * k6 + a127 * k7 + a128 * k8 + a129 * k9 +
                                a1210 * k10 + a1211 * k11));

    ComplexMatrix ksum = b1 * k1 + b6 * k6 + b7 * k7 + b8 * k8 + b9 * k9 + b10 * k10 + b11 * k11 + b12 * k12;
    yw = y + h * ksum;

    ComplexMatrix err3m = ksum - e31 * k1 - e32 * k9 - e33 * k12;
    ComplexMatrix err5m =
        e51 * k1 + e56 * k6 + e57 * k7 + e58 * k8 + e59 * k9 + e510 * k10 + e511 * k11 + e512 * k12;

    double err3 = 0.0, err5 = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double sc = atol + rtol * std::max(std::abs(y(i, j)), std::abs(yw(i, j)));
        double e3 = std::abs(err3m(i, j)) / sc;
        double e5 = std::abs(err5m(i, j)) / sc;
        err3 += e3 * e3;
        err5 += e5 * e5;
      }
    double den = err5 + 0.01 * err3;
    if (den <= 0.0) den = 1.0;
    return std::abs(h) * err5 * std::sqrt(1.0 / (double(d * d) * den));
  }
};

}  // namespace

std::vector<ComplexMatrix> reference_propagate(const GeneratorFn& a, const std::vector<double>& t_grid,
                                               const ReferenceOptions& opts) {
  if (t_grid.empty()) throw ConfigError("reference_propagate: empty time grid");
  for (size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1]))
      throw ConfigError("reference_propagate: grid must be strictly increasing");
  if (!(opts.tol >= 1e-14 && opts.tol <= 1e-6))
    throw ConfigError("reference_propagate: tol must lie in [1e-14, 1e-6]");

  const double t0 = t_grid.front();
  ComplexMatrix a0 = a(t0);
  if (a0.rows() != a0.cols()) throw DimensionMismatchError("reference_propagate: A(t) must be square");
  const int d = int(a0.rows());

  std::vector<ComplexMatrix> out;
  out.reserve(t_grid.size());

  ComplexMatrix y = ComplexMatrix::Identity(d, d);
  out.push_back(y);
  if (t_grid.size() == 1) return out;

  Stepper st(a, d, opts.tol);
  st.k1 = a0;  // dU/dt at t0 with U = I

  // crude but serviceable first step size from the ODE scale
  double scale0 = std::max(st.k1.norm(), 1e-8);
  double h = std::min(0.1, std::pow(opts.tol, 1.0 / 8.0) / scale0);

  const double safe = 0.9, min_scale = 1.0 / 3.0, max_scale = 6.0;
  const double eps = std::numeric_limits<double>::epsilon();

  double t = t0;
  size_t next = 1;
  int steps = 0;

  while (next < t_grid.size()) {
    if (++steps > opts.max_steps) throw StepSizeUnderflowError("reference_propagate: step budget exhausted");

    bool clipped = false;
    double hs = h;
    if (t + hs >= t_grid[next]) {  // land exactly on the sample point
      hs = t_grid[next] - t;
      clipped = true;
    }
    if (hs < 4.0 * eps * std::max(std::abs(t), 1.0))
      throw StepSizeUnderflowError("reference_propagate: step size underflow at t = " + std::to_string(t));

    double err = st.try_step(t, y, hs);
    if (err < 1.0) {
      t += hs;
      y = st.yw;
      st.k1 = st.deriv(t, y);
      if (clipped) {
        out.push_back(y);
        ++next;
      }
      double sc = (err == 0.0) ? max_scale : std::clamp(safe * std::pow(err, -0.125), min_scale, max_scale);
      if (!clipped)
        h = hs * sc;
      else
        h = std::max(h, hs * sc);  // keep the pre-clip step size alive
    } else {
      h = hs * std::clamp(safe * std::pow(err, -0.125), min_scale, 1.0);
    }
  }
  return out;
}

}  // namespace liexp
