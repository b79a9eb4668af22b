#include "cubicwave/ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "cubicwave/error.hpp"

namespace cubicwave::ode {

namespace {

// Dormand-Prince 8(5,3) tableau with the 7th-order continuous extension
// (Hairer, Norsett & Wanner, DOP853).
namespace dp {
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
constexpr double c14 = 0.1e+00;
constexpr double c15 = 0.2e+00;
constexpr double c16 = 0.777777777777777777777777777778e+00;

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

constexpr double a141 = 5.61675022830479523392909219681e-2;
constexpr double a147 = 2.53500210216624811088794765333e-1;
constexpr double a148 = -2.46239037470802489917441475441e-1;
constexpr double a149 = -1.24191423263816360469010140626e-1;
constexpr double a1410 = 1.5329179827876569731206322685e-1;
constexpr double a1411 = 8.20105229563468988491666602057e-3;
constexpr double a1412 = 7.56789766054569976138603589584e-3;
constexpr double a1413 = -8.298e-3;
constexpr double a151 = 3.18346481635021405060768473261e-2;
constexpr double a156 = 2.83009096723667755288322961402e-2;
constexpr double a157 = 5.35419883074385676223797384372e-2;
constexpr double a158 = -5.49237485713909884646569340306e-2;
constexpr double a1511 = -1.08347328697249322858509316994e-4;
constexpr double a1512 = 3.82571090835658412954920192323e-4;
constexpr double a1513 = -3.40465008687404560802977114492e-4;
constexpr double a1514 = 1.41312443674632500278074618366e-1;
constexpr double a161 = -4.28896301583791923408573538692e-1;
constexpr double a166 = -4.69762141536116384314449447206e0;
constexpr double a167 = 7.68342119606259904184240953878e0;
constexpr double a168 = 4.06898981839711007970213554331e0;
constexpr double a169 = 3.56727187455281109270669543021e-1;
constexpr double a1613 = -1.39902416515901462129418009734e-3;
constexpr double a1614 = 2.9475147891527723389556272149e0;
constexpr double a1615 = -9.15095847217987001081870187138e0;

constexpr double b1 = 5.42937341165687622380535766363e-2;
constexpr double b6 = 4.45031289275240888144113950566e0;
constexpr double b7 = 1.89151789931450038304281599044e0;
constexpr double b8 = -5.8012039600105847814672114227e0;
constexpr double b9 = 3.1116436695781989440891606237e-1;
constexpr double b10 = -1.52160949662516078556178806805e-1;
constexpr double b11 = 2.01365400804030348374776537501e-1;
constexpr double b12 = 4.47106157277725905176885569043e-2;

constexpr double bhh1 = 0.244094488188976377952755905512e+00;
constexpr double bhh2 = 0.733846688281611857341361741547e+00;
constexpr double bhh3 = 0.220588235294117647058823529412e-01;

constexpr double er1 = 0.1312004499419488073250102996e-01;
constexpr double er6 = -0.1225156446376204440720569753e+01;
constexpr double er7 = -0.4957589496572501915214079952e+00;
constexpr double er8 = 0.1664377182454986536961530415e+01;
constexpr double er9 = -0.3503288487499736816886487290e+00;
constexpr double er10 = 0.3341791187130174790297318841e+00;
constexpr double er11 = 0.8192320648511571246570742613e-01;
constexpr double er12 = -0.2235530786388629525884427845e-01;

constexpr double d41 = -0.84289382761090128651353491142e+01;
constexpr double d46 = 0.56671495351937776962531783590e+00;
constexpr double d47 = -0.30689499459498916912797304727e+01;
constexpr double d48 = 0.23846676565120698287728149680e+01;
constexpr double d49 = 0.21170345824450282767155149946e+01;
constexpr double d410 = -0.87139158377797299206789907490e+00;
constexpr double d411 = 0.22404374302607882758541771650e+01;
constexpr double d412 = 0.63157877876946881815570249290e+00;
constexpr double d413 = -0.88990336451333310820698117400e-01;
constexpr double d414 = 0.18148505520854727256656404962e+02;
constexpr double d415 = -0.91946323924783554000451984436e+01;
constexpr double d416 = -0.44360363875948939664310572000e+01;
constexpr double d51 = 0.10427508642579134603413151009e+02;
constexpr double d56 = 0.24228349177525818288430175319e+03;
constexpr double d57 = 0.16520045171727028198505394887e+03;
constexpr double d58 = -0.37454675472269020279518312152e+03;
constexpr double d59 = -0.22113666853125306036270938578e+02;
constexpr double d510 = 0.77334326684722638389603898808e+01;
constexpr double d511 = -0.30674084731089398182061213626e+02;
constexpr double d512 = -0.93321305264302278729567221706e+01;
constexpr double d513 = 0.15697238121770843886131091075e+02;
constexpr double d514 = -0.31139403219565177677282850411e+02;
constexpr double d515 = -0.93529243588444783865713862664e+01;
constexpr double d516 = 0.35816841486394083752465898540e+02;
constexpr double d61 = 0.19985053242002433820987653617e+02;
constexpr double d66 = -0.38703730874935176555105901742e+03;
constexpr double d67 = -0.18917813819516756882830838328e+03;
constexpr double d68 = 0.52780815920542364900561016686e+03;
constexpr double d69 = -0.11573902539959630126141871134e+02;
constexpr double d610 = 0.68812326946963000169666922661e+01;
constexpr double d611 = -0.10006050966910838403183860980e+01;
constexpr double d612 = 0.77771377980534432092869265740e+00;
constexpr double d613 = -0.27782057523535084065932004339e+01;
constexpr double d614 = -0.60196695231264120758267380846e+02;
constexpr double d615 = 0.84320405506677161018159903784e+02;
constexpr double d616 = 0.11992291136182789328035130030e+02;
constexpr double d71 = -0.25693933462703749003312586129e+02;
constexpr double d76 = -0.15418974869023643374053993627e+03;
constexpr double d77 = -0.23152937917604549567536039109e+03;
constexpr double d78 = 0.35763911791061412378285349910e+03;
constexpr double d79 = 0.93405324183624310003907691704e+02;
constexpr double d710 = -0.37458323136451633156875139351e+02;
constexpr double d711 = 0.10409964950896230045147246184e+03;
constexpr double d712 = 0.29840293426660503123344363579e+02;
constexpr double d713 = -0.43533456590011143754432175058e+02;
constexpr double d714 = 0.96324553959188282948394950600e+02;
constexpr double d715 = -0.39177261675615439165231486172e+02;
constexpr double d716 = -0.14972683625798562581422125276e+03;
}  // namespace dp

constexpr int kCoeffs = 8;
// PI controller (Gustafsson): exponents 1/8 - 0.2*beta and beta.
constexpr double kBeta = 0.04;
constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.333;
constexpr double kFacMax = 6.0;

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double z) { return std::isfinite(z); });
}

double max_norm(std::span<const double> v) {
  double m = 0.0;
  for (double z : v) m = std::max(m, std::abs(z));
  return m;
}

bool crossed(double before, double after, Crossing dir) {
  const bool up = before < 0.0 && after >= 0.0;
  const bool down = before > 0.0 && after <= 0.0;
  switch (dir) {
    case Crossing::up: return up;
    case Crossing::down: return down;
    case Crossing::any: return up || down;
  }
  return false;
}

// Thrown inside a step attempt; the step is rejected and retried smaller.
struct StageOverflow {};

}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::reached_end: return "reached_end";
    case Termination::event: return "event";
    case Termination::blowup: return "blowup";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Trajectory

State Trajectory::back_state() const {
  const auto s = state_at(size() - 1);
  return State(s.begin(), s.end());
}

bool Trajectory::covers(double x) const noexcept {
  if (xs_.empty()) return false;
  const double lo = std::min(xs_.front(), xs_.back());
  const double hi = std::max(xs_.front(), xs_.back());
  return x >= lo && x <= hi;
}

std::size_t Trajectory::segment_for(double x) const {
  // Nodes are monotone in the integration direction; segment i spans nodes i..i+1.
  const std::size_t nseg = seg_x_.size();
  if (direction_ > 0) {
    auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
    std::size_t idx = static_cast<std::size_t>(it - xs_.begin());
    idx = idx == 0 ? 0 : idx - 1;
    return std::min(idx, nseg - 1);
  }
  auto it = std::upper_bound(xs_.begin(), xs_.end(), x, std::greater<>());
  std::size_t idx = static_cast<std::size_t>(it - xs_.begin());
  idx = idx == 0 ? 0 : idx - 1;
  return std::min(idx, nseg - 1);
}

void Trajectory::evaluate(double x, std::span<double> out) const {
  if (!covers(x)) {
    std::ostringstream msg;
    msg << "dense output requested at x=" << x << " outside [" << xs_.front() << ", "
        << xs_.back() << "]";
    throw Error(ErrorKind::invalid_input, msg.str());
  }
  if (seg_x_.empty()) {
    const auto s = state_at(0);
    std::copy(s.begin(), s.end(), out.begin());
    return;
  }
  const std::size_t k = segment_for(x);
  const double s = (x - seg_x_[k]) / seg_h_[k];
  const double s1 = 1.0 - s;
  const double* r = coeffs_.data() + k * kCoeffs * dim_;
  for (std::size_t i = 0; i < dim_; ++i) {
    const double conpar = r[4 * dim_ + i] +
                          s * (r[5 * dim_ + i] + s1 * (r[6 * dim_ + i] + s * r[7 * dim_ + i]));
    out[i] = r[i] + s * (r[dim_ + i] +
                         s1 * (r[2 * dim_ + i] + s * (r[3 * dim_ + i] + s1 * conpar)));
  }
}

State Trajectory::operator()(double x) const {
  State out(dim_);
  evaluate(x, out);
  return out;
}

double Trajectory::component(double x, std::size_t i) const {
  State out(dim_);
  evaluate(x, out);
  return out[i];
}

// ---------------------------------------------------------------------------
// Integrator

class Integrator {
 public:
  Integrator(const Problem& p, const Options& o, std::span<const EventSpec> ev)
      : p_(p), o_(o), events_(ev), n_(p.initial_state.size()) {
    for (auto* v : {&k1_, &k2_, &k3_, &k4_, &k5_, &k6_, &k7_, &k8_, &k9_, &k10_, &k11_, &k12_,
                    &k13_, &k14_, &k15_, &k16_, &ynew_, &ytmp_, &errsum_})
      v->assign(n_, 0.0);
  }

  Trajectory run();

 private:
  void rhs(double x, std::span<const double> y, std::vector<double>& out);
  void rhs_checked(double x, std::span<const double> y, std::vector<double>& out);
  double initial_step(double x, std::span<const double> y, double dir);
  double attempt(double x, std::span<const double> y, double h);
  void dense_coefficients(double x, std::span<const double> y, double h, double* r);
  double event_value(std::size_t i, double x, std::span<const double> y) const;
  double locate(std::size_t i, const Trajectory& traj, double lo, double glo, double hi) const;

  const Problem& p_;
  const Options& o_;
  std::span<const EventSpec> events_;
  std::size_t n_;
  std::size_t nfev_ = 0;
  double last_x_ = 0.0;
  std::vector<double> last_y_;
  std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, k8_, k9_, k10_, k11_, k12_, k13_, k14_,
      k15_, k16_, ynew_, ytmp_, errsum_;
};

void Integrator::rhs(double x, std::span<const double> y, std::vector<double>& out) {
  ++nfev_;
  p_.rhs(x, y, out);
}

// Stage evaluation: a non-finite derivative at a finite, moderate state is a
// defect of the right-hand side; anything else rejects the step.
void Integrator::rhs_checked(double x, std::span<const double> y, std::vector<double>& out) {
  rhs(x, y, out);
  if (all_finite(out)) return;
  if (all_finite(y) && max_norm(y) <= o_.blowup_norm) {
    std::ostringstream msg;
    msg << "non-finite right-hand side at x=" << x;
    throw IntegrationFailure(msg.str(), last_x_, last_y_);
  }
  throw StageOverflow{};
}

double Integrator::initial_step(double x, std::span<const double> y, double dir) {
  const double hmax = std::min(o_.max_step, std::abs(p_.end - p_.start));
  double dnf = 0.0, dny = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double sk = o_.abs_tol + o_.rel_tol * std::abs(y[i]);
    dnf += (k1_[i] / sk) * (k1_[i] / sk);
    dny += (y[i] / sk) * (y[i] / sk);
  }
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
  h = std::min(h, hmax);
  for (std::size_t i = 0; i < n_; ++i) ytmp_[i] = y[i] + dir * h * k1_[i];
  rhs(x + dir * h, ytmp_, k2_);
  double der2 = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    const double sk = o_.abs_tol + o_.rel_tol * std::abs(y[i]);
    const double t = (k2_[i] - k1_[i]) / sk;
    der2 += t * t;
  }
  if (!std::isfinite(der2)) return std::max(hmax * 1e-8, 1e-12);
  der2 = std::sqrt(der2 / static_cast<double>(n_)) / h;
  const double der12 = std::max(std::abs(der2), std::sqrt(dnf / static_cast<double>(n_)));
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 1.0 / 8.0);
  return std::min({100.0 * h, h1, hmax});
}

// One DOP853 step from (x, y) with signed step h. Returns the scaled error
// norm; the 8th-order solution is left in ynew_ and f(x+h, ynew) is not yet
// evaluated.
double Integrator::attempt(double x, std::span<const double> y, double h) {
  using namespace dp;
  auto stage = [&](auto&& combine, double c, std::vector<double>& k) {
    for (std::size_t i = 0; i < n_; ++i) ytmp_[i] = y[i] + h * combine(i);
    rhs_checked(x + c * h, ytmp_, k);
  };
  stage([&](std::size_t i) { return a21 * k1_[i]; }, c2, k2_);
  stage([&](std::size_t i) { return a31 * k1_[i] + a32 * k2_[i]; }, c3, k3_);
  stage([&](std::size_t i) { return a41 * k1_[i] + a43 * k3_[i]; }, c4, k4_);
  stage([&](std::size_t i) { return a51 * k1_[i] + a53 * k3_[i] + a54 * k4_[i]; }, c5, k5_);
  stage([&](std::size_t i) { return a61 * k1_[i] + a64 * k4_[i] + a65 * k5_[i]; }, c6, k6_);
  stage([&](std::size_t i) { return a71 * k1_[i] + a74 * k4_[i] + a75 * k5_[i] + a76 * k6_[i]; },
        c7, k7_);
  stage(
      [&](std::size_t i) {
        return a81 * k1_[i] + a84 * k4_[i] + a85 * k5_[i] + a86 * k6_[i] + a87 * k7_[i];
      },
      c8, k8_);
  stage(
      [&](std::size_t i) {
        return a91 * k1_[i] + a94 * k4_[i] + a95 * k5_[i] + a96 * k6_[i] + a97 * k7_[i] +
               a98 * k8_[i];
      },
      c9, k9_);
  stage(
      [&](std::size_t i) {
        return a101 * k1_[i] + a104 * k4_[i] + a105 * k5_[i] + a106 * k6_[i] + a107 * k7_[i] +
               a108 * k8_[i] + a109 * k9_[i];
      },
      c10, k10_);
  stage(
      [&](std::size_t i) {
        return a111 * k1_[i] + a114 * k4_[i] + a115 * k5_[i] + a116 * k6_[i] + a117 * k7_[i] +
               a118 * k8_[i] + a119 * k9_[i] + a1110 * k10_[i];
      },
      c11, k11_);
  stage(
      [&](std::size_t i) {
        return a121 * k1_[i] + a124 * k4_[i] + a125 * k5_[i] + a126 * k6_[i] + a127 * k7_[i] +
               a128 * k8_[i] + a129 * k9_[i] + a1210 * k10_[i] + a1211 * k11_[i];
      },
      1.0, k12_);

  double err = 0.0, err2 = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    errsum_[i] = b1 * k1_[i] + b6 * k6_[i] + b7 * k7_[i] + b8 * k8_[i] + b9 * k9_[i] +
                 b10 * k10_[i] + b11 * k11_[i] + b12 * k12_[i];
    ynew_[i] = y[i] + h * errsum_[i];
    const double sk = o_.abs_tol + o_.rel_tol * std::max(std::abs(y[i]), std::abs(ynew_[i]));
    const double e3 = errsum_[i] - bhh1 * k1_[i] - bhh2 * k9_[i] - bhh3 * k12_[i];
    const double e5 = er1 * k1_[i] + er6 * k6_[i] + er7 * k7_[i] + er8 * k8_[i] + er9 * k9_[i] +
                      er10 * k10_[i] + er11 * k11_[i] + er12 * k12_[i];
    err += (e5 / sk) * (e5 / sk);
    err2 += (e3 / sk) * (e3 / sk);
  }
  double deno = err + 0.01 * err2;
  if (deno <= 0.0) deno = 1.0;
  const double out = std::abs(h) * err * std::sqrt(1.0 / (static_cast<double>(n_) * deno));
  if (!std::isfinite(out) || !all_finite(ynew_)) throw StageOverflow{};
  return out;
}

// Requires k13_ = f(x + h, ynew_). Fills the 8 coefficient blocks in r.
void Integrator::dense_coefficients(double x, std::span<const double> y, double h, double* r) {
  using namespace dp;
  const std::size_t n = n_;
  for (std::size_t i = 0; i < n; ++i) {
    const double ydiff = ynew_[i] - y[i];
    const double bspl = h * k1_[i] - ydiff;
    r[i] = y[i];
    r[n + i] = ydiff;
    r[2 * n + i] = bspl;
    r[3 * n + i] = ydiff - h * k13_[i] - bspl;
    r[4 * n + i] = d41 * k1_[i] + d46 * k6_[i] + d47 * k7_[i] + d48 * k8_[i] + d49 * k9_[i] +
                   d410 * k10_[i] + d411 * k11_[i] + d412 * k12_[i];
    r[5 * n + i] = d51 * k1_[i] + d56 * k6_[i] + d57 * k7_[i] + d58 * k8_[i] + d59 * k9_[i] +
                   d510 * k10_[i] + d511 * k11_[i] + d512 * k12_[i];
    r[6 * n + i] = d61 * k1_[i] + d66 * k6_[i] + d67 * k7_[i] + d68 * k8_[i] + d69 * k9_[i] +
                   d610 * k10_[i] + d611 * k11_[i] + d612 * k12_[i];
    r[7 * n + i] = d71 * k1_[i] + d76 * k6_[i] + d77 * k7_[i] + d78 * k8_[i] + d79 * k9_[i] +
                   d710 * k10_[i] + d711 * k11_[i] + d712 * k12_[i];
  }
  for (std::size_t i = 0; i < n; ++i)
    ytmp_[i] = y[i] + h * (a141 * k1_[i] + a147 * k7_[i] + a148 * k8_[i] + a149 * k9_[i] +
                           a1410 * k10_[i] + a1411 * k11_[i] + a1412 * k12_[i] + a1413 * k13_[i]);
  rhs(x + c14 * h, ytmp_, k14_);
  for (std::size_t i = 0; i < n; ++i)
    ytmp_[i] = y[i] + h * (a151 * k1_[i] + a156 * k6_[i] + a157 * k7_[i] + a158 * k8_[i] +
                           a1511 * k11_[i] + a1512 * k12_[i] + a1513 * k13_[i] + a1514 * k14_[i]);
  rhs(x + c15 * h, ytmp_, k15_);
  for (std::size_t i = 0; i < n; ++i)
    ytmp_[i] = y[i] + h * (a161 * k1_[i] + a166 * k6_[i] + a167 * k7_[i] + a168 * k8_[i] +
                           a169 * k9_[i] + a1613 * k13_[i] + a1614 * k14_[i] + a1615 * k15_[i]);
  rhs(x + c16 * h, ytmp_, k16_);
  for (std::size_t i = 0; i < n; ++i) {
    r[4 * n + i] = h * (r[4 * n + i] + d413 * k13_[i] + d414 * k14_[i] + d415 * k15_[i] +
                        d416 * k16_[i]);
    r[5 * n + i] = h * (r[5 * n + i] + d513 * k13_[i] + d514 * k14_[i] + d515 * k15_[i] +
                        d516 * k16_[i]);
    r[6 * n + i] = h * (r[6 * n + i] + d613 * k13_[i] + d614 * k14_[i] + d615 * k15_[i] +
                        d616 * k16_[i]);
    r[7 * n + i] = h * (r[7 * n + i] + d713 * k13_[i] + d714 * k14_[i] + d715 * k15_[i] +
                        d716 * k16_[i]);
  }
}

double Integrator::event_value(std::size_t i, double x, std::span<const double> y) const {
  const EventSpec& ev = events_[i];
  switch (ev.kind) {
    case EventKind::sign_change: return ev.functional(x, y);
    case EventKind::norm_threshold: return max_norm(y) - ev.threshold;
    case EventKind::step_underflow: return 1.0;
  }
  return 1.0;
}

// Bisection on the dense output; returns the first point past the crossing.
double Integrator::locate(std::size_t i, const Trajectory& traj, double lo, double glo,
                          double hi) const {
  State y(n_);
  const Crossing dir = events_[i].kind == EventKind::norm_threshold ? Crossing::up
                                                                     : events_[i].direction;
  while (std::abs(hi - lo) > o_.event_tol * std::max(1.0, std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    traj.evaluate(mid, y);
    const double gm = event_value(i, mid, y);
    if (crossed(glo, gm, dir)) {
      hi = mid;
    } else {
      lo = mid;
      glo = gm;
    }
  }
  return hi;
}

Trajectory Integrator::run() {
  const double span = p_.end - p_.start;
  if (!(o_.rel_tol > 0.0) || !(o_.abs_tol > 0.0))
    throw Error(ErrorKind::invalid_input, "tolerances must be positive");
  if (!(std::abs(span) > 0.0) || !std::isfinite(span))
    throw Error(ErrorKind::invalid_input, "zero-length or non-finite integration domain");
  if (n_ == 0) throw Error(ErrorKind::invalid_input, "empty initial state");
  if (!p_.rhs) throw Error(ErrorKind::invalid_input, "missing right-hand side");
  for (const auto& ev : events_)
    if (ev.kind == EventKind::sign_change && !ev.functional)
      throw Error(ErrorKind::invalid_input, "sign_change event without functional");

  const double dir = span > 0 ? 1.0 : -1.0;
  Trajectory traj;
  traj.dim_ = n_;
  traj.direction_ = dir;

  double x = p_.start;
  std::vector<double> y = p_.initial_state;
  last_x_ = x;
  last_y_ = y;
  traj.xs_.push_back(x);
  traj.ys_.insert(traj.ys_.end(), y.begin(), y.end());

  auto finish = [&](Termination t, double loc, int idx) {
    traj.termination = t;
    traj.termination_location = loc;
    traj.event_index = idx;
    traj.rhs_evaluations = nfev_;
    return traj;
  };

  if (!all_finite(y)) throw IntegrationFailure("non-finite initial state", x, y);
  if (max_norm(y) > o_.blowup_norm) return finish(Termination::blowup, x, -1);

  rhs(x, y, k1_);
  if (!all_finite(k1_)) throw IntegrationFailure("non-finite right-hand side at start", x, y);

  std::vector<double> gvals(events_.size());
  for (std::size_t i = 0; i < events_.size(); ++i) gvals[i] = event_value(i, x, y);

  double h = o_.initial_step > 0.0 ? std::min(o_.initial_step, std::abs(span))
                                   : initial_step(x, y, dir);
  double facold = 1e-4;
  bool last_rejected = false;
  std::vector<double> r(kCoeffs * n_);

  for (std::size_t step = 0;; ++step) {
    if (step >= o_.max_steps)
      throw IntegrationFailure("step budget exhausted", last_x_, last_y_);
    h = std::min(h, o_.max_step);
    if (h < o_.min_step_factor * std::max(1.0, std::abs(x)))
      return finish(Termination::blowup, x, -1);
    const double remaining = (p_.end - x) * dir;
    bool hits_end = false;
    if (h >= remaining * (1.0 - 1e-13)) {
      h = remaining;
      hits_end = true;
    }

    double err = 0.0;
    bool overflow = false;
    try {
      err = attempt(x, y, dir * h);
    } catch (const StageOverflow&) {
      overflow = true;
    }
    if (overflow) {
      ++traj.rejected_steps;
      h *= 0.25;
      last_rejected = true;
      continue;
    }

    const double fac11 = std::pow(err, 0.125 - kBeta * 0.2);
    double fac = fac11 / std::pow(facold, kBeta);
    fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
    double hnew = h / fac;

    if (err > 1.0) {
      ++traj.rejected_steps;
      h /= std::min(1.0 / kFacMin, fac11 / kSafety);
      last_rejected = true;
      continue;
    }

    // Accepted.
    const double xnew = hits_end ? p_.end : x + dir * h;
    facold = std::max(err, 1e-4);
    rhs(xnew, ynew_, k13_);
    bool derivative_ok = all_finite(k13_);
    if (!derivative_ok && all_finite(ynew_) && max_norm(ynew_) <= o_.blowup_norm)
      throw IntegrationFailure("non-finite right-hand side at accepted node", last_x_, last_y_);
    if (!derivative_ok) {
      // Accepted state overflows the right-hand side: treat as blowup at the last node.
      return finish(Termination::blowup, x, -1);
    }
    dense_coefficients(x, y, dir * h, r.data());
    if (!all_finite(r)) std::fill(r.begin() + 4 * n_, r.end(), 0.0);

    traj.seg_x_.push_back(x);
    traj.seg_h_.push_back(dir * h);
    traj.coeffs_.insert(traj.coeffs_.end(), r.begin(), r.end());
    traj.xs_.push_back(xnew);
    traj.ys_.insert(traj.ys_.end(), ynew_.begin(), ynew_.end());
    ++traj.accepted_steps;

    // Events: earliest crossing in this step wins.
    double best = 0.0;
    int best_idx = -1;
    for (std::size_t i = 0; i < events_.size(); ++i) {
      if (events_[i].kind == EventKind::step_underflow) continue;
      const double gnew = event_value(i, xnew, ynew_);
      const Crossing cdir =
          events_[i].kind == EventKind::norm_threshold ? Crossing::up : events_[i].direction;
      if (crossed(gvals[i], gnew, cdir)) {
        const double loc = locate(i, traj, x, gvals[i], xnew);
        if (best_idx < 0 || (loc - best) * dir < 0) {
          best = loc;
          best_idx = static_cast<int>(i);
        }
      }
      gvals[i] = gnew;
    }
    if (best_idx >= 0) {
      const State ye = traj(best);
      traj.xs_.back() = best;
      std::copy(ye.begin(), ye.end(), traj.ys_.end() - static_cast<std::ptrdiff_t>(n_));
      return finish(Termination::event, best, best_idx);
    }

    x = xnew;
    y = ynew_;
    k1_ = k13_;
    last_x_ = x;
    last_y_ = y;

    if (max_norm(y) > o_.blowup_norm) return finish(Termination::blowup, x, -1);
    if (hits_end) return finish(Termination::reached_end, x, -1);

    if (last_rejected) hnew = std::min(hnew, h);
    last_rejected = false;
    h = hnew;

    for (std::size_t i = 0; i < events_.size(); ++i) {
      if (events_[i].kind == EventKind::step_underflow &&
          h < events_[i].threshold * std::max(1.0, std::abs(x)))
        return finish(Termination::event, x, static_cast<int>(i));
    }
  }
}

Trajectory integrate(const Problem& problem, const Options& options,
                     std::span<const EventSpec> events) {
  Integrator integrator(problem, options, events);
  return integrator.run();
}

std::vector<double> find_crossings(const Trajectory& trajectory, const Functional& functional,
                                   Crossing direction, double tol) {
  std::vector<double> out;
  const auto xs = trajectory.nodes();
  if (xs.size() < 2) return out;
  State y(trajectory.dimension());
  double gprev = functional(xs[0], trajectory.state_at(0));
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double g = functional(xs[i], trajectory.state_at(i));
    if (crossed(gprev, g, direction)) {
      double lo = xs[i - 1], hi = xs[i], glo = gprev;
      while (std::abs(hi - lo) > tol * std::max(1.0, std::abs(hi))) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        trajectory.evaluate(mid, y);
        const double gm = functional(mid, y);
        if (crossed(glo, gm, direction)) {
          hi = mid;
        } else {
          lo = mid;
          glo = gm;
        }
      }
      out.push_back(hi);
    }
    gprev = g;
  }
  return out;
}

Trajectory integrate(const Problem& problem, double rel_tol, double abs_tol,
                     std::span<const EventSpec> events) {
  Options o;
  o.rel_tol = rel_tol;
  o.abs_tol = abs_tol;
  return integrate(problem, o, events);
}

}  // namespace cubicwave::ode
