#include "dispml/tdsim.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

namespace dispml {

namespace {

constexpr int kMaxChain = 16;

double profile_sigma(const PmlProfile& p, double depth_frac, double layer_len) {
  if (p.kind == StretchKind::None || p.thickness == 0) return 0.0;
  return p.effective_sigma_max(layer_len) * std::pow(depth_frac, p.grading_exponent);
}

double profile_alpha(const PmlProfile& p, double depth_frac) {
  if (p.kind != StretchKind::CFS || p.thickness == 0) return 0.0;
  if (p.alpha_grading == PmlProfile::AlphaGrading::Constant) return p.alpha_max;
  return p.alpha_max * (1.0 - depth_frac);
}

/// depth_frac in [0,1]: 0 at the interface to the physical region, 1 at the
/// outer wall. Negative for points outside the layer.
double depth_left(const Grid1D& g, double x) {
  const double w = g.pml_left.thickness * g.dx;
  return w > 0.0 ? (w - x) / w : -1.0;
}

double depth_right(const Grid1D& g, double x) {
  const double w = g.pml_right.thickness * g.dx;
  const double x0 = g.length() - w;
  return w > 0.0 ? (x - x0) / w : -1.0;
}

}  // namespace

double PmlProfile::effective_sigma_max(double layer_len) const {
  if (!auto_sigma_max) return sigma_max;
  // field round-trip attenuation of 1e-4: integral sigma = 2 ln(10^2)
  return 2.0 * std::log(1e2) * (grading_exponent + 1) / layer_len;
}

double Grid1D::sigma_at(double x) const {
  if (uniform_sigma) return *uniform_sigma;
  const double dl = depth_left(*this, x);
  if (dl > 0.0) return profile_sigma(pml_left, std::min(dl, 1.0), pml_left.thickness * dx);
  const double dr = depth_right(*this, x);
  if (dr > 0.0)
    return profile_sigma(pml_right, std::min(dr, 1.0), pml_right.thickness * dx);
  return 0.0;
}

double Grid1D::alpha_at(double x) const {
  if (uniform_alpha) return *uniform_alpha;
  const double dl = depth_left(*this, x);
  if (dl > 0.0) return profile_alpha(pml_left, std::min(dl, 1.0));
  const double dr = depth_right(*this, x);
  if (dr > 0.0) return profile_alpha(pml_right, std::min(dr, 1.0));
  // alpha extends into the physical region as its interface value
  if (pml_left.thickness > 0 && pml_left.kind == StretchKind::CFS)
    return profile_alpha(pml_left, 0.0);
  if (pml_right.thickness > 0 && pml_right.kind == StretchKind::CFS)
    return profile_alpha(pml_right, 0.0);
  return 0.0;
}

double SourceSpec::time_factor(double t) const {
  if (type == Type::None || t <= 0.0) return 0.0;
  const double tc = center_time();
  const double arg = (t - tc) / width;
  return amplitude * std::exp(-arg * arg) * std::sin(omega0 * (t - tc));
}

double SimConfig::resolved_dt() const {
  if (dt > 0.0) return dt;
  return cfl_safety * grid.dx * std::sqrt(std::min(material.eps_inf, 1.0));
}

PmlStretch SimConfig::stretch_kind() const {
  switch (variant) {
    case SystemVariant::Dispersion: return {StretchKind::None, 0.0, 0.0};
    case SystemVariant::DispersionUpml: return {StretchKind::Uniaxial, 0.0, 0.0};
    default: return {StretchKind::CFS, 0.0, 0.0};
  }
}

void SimConfig::validate() const {
  material.validate();
  if (grid.n_cells < 4) throw ConfigError("grid needs at least 4 cells");
  if (!(grid.dx > 0.0)) throw ConfigError("dx must be positive");
  if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
  if (grid.pml_left.thickness + grid.pml_right.thickness >= grid.n_cells)
    throw ConfigError("absorbing layers cover the whole domain");
  const double limit = cfl_safety * grid.dx * std::sqrt(std::min(material.eps_inf, 1.0));
  if (dt > 0.0 && dt > limit * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt = " << dt << " exceeds the stability limit " << limit;
    throw CflViolation(os.str());
  }
  if (material.eps_inf <= 0.0)
    throw ConfigError("simulated media need eps_inf > 0");
}

std::vector<double>& FieldState::block(const std::string& name) {
  for (std::size_t i = 0; i < block_names.size(); ++i)
    if (block_names[i] == name) return data[i];
  throw std::out_of_range("no state block named " + name);
}

const std::vector<double>& FieldState::block(const std::string& name) const {
  return const_cast<FieldState*>(this)->block(name);
}

// ---------------------------------------------------------------------------
// Simulator
// ---------------------------------------------------------------------------

namespace {

/// Invert a small dense matrix (Gauss-Jordan with partial pivoting).
std::vector<double> invert_small(std::vector<double> a, int n) {
  std::vector<double> inv(n * n, 0.0);
  for (int i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-300)
      throw std::runtime_error("singular per-node update matrix");
    if (piv != col) {
      for (int k = 0; k < n; ++k) {
        std::swap(a[col * n + k], a[piv * n + k]);
        std::swap(inv[col * n + k], inv[piv * n + k]);
      }
    }
    const double d = a[col * n + col];
    for (int k = 0; k < n; ++k) {
      a[col * n + k] /= d;
      inv[col * n + k] /= d;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const double m = a[r * n + col];
      if (m == 0.0) continue;
      for (int k = 0; k < n; ++k) {
        a[r * n + k] -= m * a[col * n + k];
        inv[r * n + k] -= m * inv[col * n + k];
      }
    }
  }
  return inv;
}

}  // namespace

struct Simulator::Impl {
  SimConfig cfg;
  double dt = 0.0;
  int steps = 0;
  BlockSystem base;  // assembled at sigma = alpha = 0

  // chain block indices into the layout (field entry first)
  std::vector<std::size_t> e_chain, h_chain;
  // affine decomposition M1(sigma, alpha) = M1_0 + sigma*M1_s + alpha*M1_a,
  // restricted to each chain
  std::vector<double> e_m1_0, e_m1_s, e_m1_a, e_m0;
  std::vector<double> h_m1_0, h_m1_s, h_m1_a, h_m0;
  // per-node update operators: u_new = minv * u_old + dt * input * col0
  std::vector<double> e_minv, e_col0;  // (n+1) * me*me and (n+1) * me
  std::vector<double> h_minv, h_col0;  // n * mh*mh and n * mh
  int me = 0, mh = 0;

  FieldState st;
  std::vector<double> src_profile;  // spatial weight per E node

  explicit Impl(const SimConfig& c) : cfg(c) {
    cfg.validate();
    dt = cfg.resolved_dt();

    PmlStretch probe = cfg.stretch_kind();
    const PmlStretch s00 = probe;
    PmlStretch s10 = probe; s10.sigma = 1.0;
    PmlStretch s01 = probe; s01.alpha = 1.0;
    base = assemble(cfg.variant, cfg.material, s00);
    const BlockSystem bs = assemble(cfg.variant, cfg.material, s10);
    BlockSystem ba = base;
    if (probe.kind == StretchKind::CFS) ba = assemble(cfg.variant, cfg.material, s01);

    const std::size_t n = base.layout.dim();
    for (std::size_t i = 0; i < n; ++i) {
      if (base.layout.blocks[i].coupled_to_E)
        e_chain.push_back(i);
      else
        h_chain.push_back(i);
    }
    me = int(e_chain.size());
    mh = int(h_chain.size());
    if (me > kMaxChain || mh > kMaxChain)
      throw ConfigError("too many auxiliary blocks for the stepper");

    auto restrict_m = [&](const DenseMatrix& m, const std::vector<std::size_t>& idx) {
      std::vector<double> out(idx.size() * idx.size());
      for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < idx.size(); ++c)
          out[r * idx.size() + c] = m(idx[r], idx[c]);
      return out;
    };
    auto diff = [](std::vector<double> a, const std::vector<double>& b) {
      for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
      return a;
    };
    e_m0 = restrict_m(base.M0, e_chain);
    e_m1_0 = restrict_m(base.M1, e_chain);
    e_m1_s = diff(restrict_m(bs.M1, e_chain), e_m1_0);
    e_m1_a = diff(restrict_m(ba.M1, e_chain), e_m1_0);
    h_m0 = restrict_m(base.M0, h_chain);
    h_m1_0 = restrict_m(base.M1, h_chain);
    h_m1_s = diff(restrict_m(bs.M1, h_chain), h_m1_0);
    h_m1_a = diff(restrict_m(ba.M1, h_chain), h_m1_0);

    build_node_operators();
    init_state();
    build_source_profile();
  }

  void build_node_operators() {
    const int nc = cfg.grid.n_cells;
    e_minv.assign(std::size_t(nc + 1) * me * me, 0.0);
    e_col0.assign(std::size_t(nc + 1) * me, 0.0);
    h_minv.assign(std::size_t(nc) * mh * mh, 0.0);
    h_col0.assign(std::size_t(nc) * mh, 0.0);

    auto build = [&](const std::vector<double>& m0, const std::vector<double>& m1_0,
                     const std::vector<double>& m1_s, const std::vector<double>& m1_a,
                     int m, double sg, double al, double* minv_out, double* col_out) {
      std::vector<double> p(m * m), q(m * m);
      for (int k = 0; k < m * m; ++k) {
        const double m1 = m1_0[k] + sg * m1_s[k] + al * m1_a[k];
        p[k] = m0[k] + 0.5 * dt * m1;
        q[k] = m0[k] - 0.5 * dt * m1;
      }
      const std::vector<double> pinv = invert_small(p, m);
      for (int r = 0; r < m; ++r) {
        col_out[r] = pinv[r * m + 0];
        for (int c = 0; c < m; ++c) {
          double acc = 0.0;
          for (int k = 0; k < m; ++k) acc += pinv[r * m + k] * q[k * m + c];
          minv_out[r * m + c] = acc;
        }
      }
    };

    for (int i = 0; i <= nc; ++i) {
      const double x = i * cfg.grid.dx;
      build(e_m0, e_m1_0, e_m1_s, e_m1_a, me, cfg.grid.sigma_at(x),
            cfg.grid.alpha_at(x), &e_minv[std::size_t(i) * me * me],
            &e_col0[std::size_t(i) * me]);
    }
    for (int j = 0; j < nc; ++j) {
      const double x = (j + 0.5) * cfg.grid.dx;
      build(h_m0, h_m1_0, h_m1_s, h_m1_a, mh, cfg.grid.sigma_at(x),
            cfg.grid.alpha_at(x), &h_minv[std::size_t(j) * mh * mh],
            &h_col0[std::size_t(j) * mh]);
    }
  }

  void init_state() {
    st.time = 0.0;
    st.block_names.clear();
    st.block_on_e_nodes.clear();
    st.data.clear();
    const int nc = cfg.grid.n_cells;
    for (const auto& b : base.layout.blocks) {
      st.block_names.push_back(b.name);
      st.block_on_e_nodes.push_back(b.coupled_to_E ? 1 : 0);
      st.data.emplace_back(b.coupled_to_E ? nc + 1 : nc, 0.0);
    }
  }

  void build_source_profile() {
    const int nc = cfg.grid.n_cells;
    src_profile.assign(nc + 1, 0.0);
    if (cfg.source.type == SourceSpec::Type::None) return;
    const int i0 = std::clamp(int(std::lround(cfg.source.position * nc)), 1, nc - 1);
    if (cfg.source.spatial_width <= 0.0) {
      src_profile[i0] = 1.0;
      return;
    }
    for (int i = 0; i <= nc; ++i) {
      const double arg = (i - i0) / cfg.source.spatial_width;
      const double w = std::exp(-arg * arg);
      if (w > 1e-14) src_profile[i] = w;
    }
  }

  double* chain_ptr(const std::vector<std::size_t>& chain, int slot) {
    return st.data[chain[slot]].data();
  }

  void advance(const SourceFn* src) {
    const int nc = cfg.grid.n_cells;
    const double inv_dx = 1.0 / cfg.grid.dx;
    const double t_half = st.time + 0.5 * dt;

    // gather raw pointers per chain slot (blocks are distinct vectors)
    double* eb[kMaxChain];
    double* hb[kMaxChain];
    for (int s = 0; s < me; ++s) eb[s] = st.data[e_chain[s]].data();
    for (int s = 0; s < mh; ++s) hb[s] = st.data[h_chain[s]].data();
    const double* E = eb[0];

    // H chain: t - dt/2 -> t + dt/2, driven by the current E differences
    const bool par = cfg.exec == Exec::Parallel;
#pragma omp parallel for schedule(static) if (par)
    for (int j = 0; j < nc; ++j) {
      double u[kMaxChain], v[kMaxChain];
      for (int s = 0; s < mh; ++s) u[s] = hb[s][j];
      const double* M = &h_minv[std::size_t(j) * mh * mh];
      const double* c0 = &h_col0[std::size_t(j) * mh];
      const double input = (E[j + 1] - E[j]) * inv_dx;
      for (int r = 0; r < mh; ++r) {
        double acc = 0.0;
        for (int k = 0; k < mh; ++k) acc += M[r * mh + k] * u[k];
        v[r] = acc + dt * input * c0[r];
      }
      for (int s = 0; s < mh; ++s) hb[s][j] = v[s];
    }

    // E chain: t -> t + dt, driven by the half-step H differences and source
    const double* H = hb[0];
    const double g = cfg.source.time_factor(t_half);
#pragma omp parallel for schedule(static) if (par)
    for (int i = 1; i < nc; ++i) {
      double u[kMaxChain], v[kMaxChain];
      for (int s = 0; s < me; ++s) u[s] = eb[s][i];
      const double* M = &e_minv[std::size_t(i) * me * me];
      const double* c0 = &e_col0[std::size_t(i) * me];
      double input = (H[i] - H[i - 1]) * inv_dx + g * src_profile[i];
      if (src) input += (*src)(i, t_half);
      for (int r = 0; r < me; ++r) {
        double acc = 0.0;
        for (int k = 0; k < me; ++k) acc += M[r * me + k] * u[k];
        v[r] = acc + dt * input * c0[r];
      }
      for (int s = 0; s < me; ++s) eb[s][i] = v[s];
    }

    // perfect-conductor walls plus decay of boundary auxiliaries
    for (int i : {0, nc}) {
      double u[kMaxChain], v[kMaxChain];
      for (int s = 0; s < me; ++s) u[s] = eb[s][i];
      const double* M = &e_minv[std::size_t(i) * me * me];
      for (int r = 0; r < me; ++r) {
        double acc = 0.0;
        for (int k = 0; k < me; ++k) acc += M[r * me + k] * u[k];
        v[r] = acc;
      }
      for (int s = 0; s < me; ++s) eb[s][i] = v[s];
      eb[0][i] = 0.0;
    }

    st.time += dt;
    ++steps;
    check_finite();
  }

  void check_finite() const {
    for (std::size_t b = 0; b < st.data.size(); ++b) {
      for (double v : st.data[b]) {
        if (!std::isfinite(v)) {
          std::ostringstream os;
          os << "non-finite value in block " << st.block_names[b] << " after step "
             << steps << " (t = " << st.time << ")";
          throw NonFiniteField(os.str());
        }
      }
    }
  }

  EnergyReport energy() const {
    EnergyReport rep;
    const auto& E = st.data[e_chain[0]];
    const auto& H = st.data[h_chain[0]];
    const double dx = cfg.grid.dx;
    const double epsi = cfg.material.eps_inf;
    const int lo = cfg.grid.phys_lo(), hi = cfg.grid.phys_hi();
    double phys = 0.0, total = 0.0;
    for (int i = 0; i < int(E.size()); ++i) {
      const double v = epsi * E[i] * E[i];
      total += v;
      if (i >= lo && i <= hi) phys += v;
    }
    for (int j = 0; j < int(H.size()); ++j) {
      const double v = H[j] * H[j];
      total += v;
      if (j >= lo && j < hi) phys += v;
    }
    rep.field_physical = 0.5 * dx * phys;
    rep.field_total = 0.5 * dx * total;
    double norm = 0.0;
    for (std::size_t s = 0; s < e_chain.size(); ++s) {
      const double w = e_m0[s * me + s];
      for (double v : st.data[e_chain[s]]) norm += w * v * v;
    }
    for (std::size_t s = 0; s < h_chain.size(); ++s) {
      const double w = h_m0[s * mh + s];
      for (double v : st.data[h_chain[s]]) norm += w * v * v;
    }
    rep.state_norm = 0.5 * dx * norm;
    return rep;
  }
};

Simulator::Simulator(const SimConfig& cfg) : impl_(std::make_unique<Impl>(cfg)) {}
Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

void Simulator::step() { impl_->advance(nullptr); }
void Simulator::step_with_source(const SourceFn& src) { impl_->advance(&src); }
int Simulator::steps_taken() const { return impl_->steps; }
double Simulator::time() const { return impl_->st.time; }
double Simulator::dt() const { return impl_->dt; }
const FieldState& Simulator::state() const { return impl_->st; }
const BlockSystem& Simulator::system() const { return impl_->base; }

void Simulator::set_state(const FieldState& s) {
  if (s.data.size() != impl_->st.data.size())
    throw std::invalid_argument("state layout does not match the configuration");
  for (std::size_t b = 0; b < s.data.size(); ++b)
    if (s.data[b].size() != impl_->st.data[b].size())
      throw std::invalid_argument("state array sizes do not match the grid");
  impl_->st = s;
}

EnergyReport Simulator::energy() const { return impl_->energy(); }

FieldState step(const FieldState& state, const SimConfig& cfg) {
  Simulator sim(cfg);
  sim.set_state(state);
  sim.step();
  return sim.state();
}

EnergyReport energy(const FieldState& state, const SimConfig& cfg) {
  Simulator sim(cfg);
  sim.set_state(state);
  return sim.energy();
}

const TimeSeries* RunResult::find(const std::string& name) const {
  for (const auto& s : series)
    if (s.name == name) return &s;
  return nullptr;
}

namespace {

RunResult run_impl(const SimConfig& cfg, const SourceFn* src,
                   std::vector<std::vector<double>>* e_frames,
                   std::vector<std::vector<double>>* full_frames) {
  Simulator sim(cfg);
  RunResult out;

  std::vector<int> probe_nodes;
  for (double frac : cfg.probe_positions)
    probe_nodes.push_back(
        std::clamp(int(std::lround(frac * cfg.grid.n_cells)), 0, cfg.grid.n_cells));

  out.series.push_back({"energy_phys", {}, {}});
  out.series.push_back({"energy_total", {}, {}});
  out.series.push_back({"state_norm", {}, {}});
  for (std::size_t k = 0; k < probe_nodes.size(); ++k) {
    std::ostringstream os;
    os << "probe_" << k;
    out.series.push_back({os.str(), {}, {}});
  }

  const auto& E = sim.state().block("E");
  const FieldState& st = sim.state();

  // Energies are recorded at half steps with the integer-step blocks
  // averaged across the step, which tracks the conserved discrete quadratic
  // form to O(dt^2); instantaneous sampling would add an O(dt) wobble from
  // the staggering.
  std::vector<std::vector<double>> stash;
  auto energy_record = [&](double t_half) {
    const double dx = cfg.grid.dx;
    const double epsi = cfg.material.eps_inf;
    const int lo = cfg.grid.phys_lo(), hi = cfg.grid.phys_hi();
    double phys = 0.0, total = 0.0, norm = 0.0;
    std::size_t e_slot = 0;
    for (std::size_t b = 0; b < st.data.size(); ++b) {
      const bool on_e = st.block_on_e_nodes[b];
      const double w = sim.system().M0(b, b);
      const std::vector<double>& cur = st.data[b];
      const std::vector<double>* prev = on_e ? &stash[e_slot++] : nullptr;
      for (int i = 0; i < int(cur.size()); ++i) {
        const double v = on_e ? 0.5 * ((*prev)[i] + cur[i]) : cur[i];
        norm += w * v * v;
        if (b == 0 || st.block_names[b] == "H") {
          const double fv = (b == 0 ? epsi : 1.0) * v * v;
          total += fv;
          const bool in_phys = on_e ? (i >= lo && i <= hi) : (i >= lo && i < hi);
          if (in_phys) phys += fv;
        }
      }
    }
    out.series[0].times.push_back(t_half);
    out.series[0].values.push_back(0.5 * dx * phys);
    out.series[1].times.push_back(t_half);
    out.series[1].values.push_back(0.5 * dx * total);
    out.series[2].times.push_back(t_half);
    out.series[2].values.push_back(0.5 * dx * norm);
    out.peak_field_energy = std::max(out.peak_field_energy, 0.5 * dx * phys);
  };
  auto probe_record = [&](double t_half) {
    for (std::size_t k = 0; k < probe_nodes.size(); ++k) {
      out.series[3 + k].times.push_back(t_half);
      out.series[3 + k].values.push_back(
          0.5 * (stash[0][probe_nodes[k]] + E[probe_nodes[k]]));
    }
  };
  auto snapshot = [&]() {
    if (e_frames) e_frames->push_back(E);
    if (full_frames) {
      std::vector<double> all;
      for (const auto& blockv : st.data)
        all.insert(all.end(), blockv.begin(), blockv.end());
      full_frames->push_back(std::move(all));
    }
  };

  snapshot();
  for (int n = 0; n < cfg.n_steps; ++n) {
    const bool rec = (n + 1) % cfg.record_stride == 0 || n + 1 == cfg.n_steps;
    if (rec) {
      stash.clear();
      for (std::size_t b = 0; b < st.data.size(); ++b)
        if (st.block_on_e_nodes[b]) stash.push_back(st.data[b]);
    }
    const double t_half = sim.time() + 0.5 * sim.dt();
    if (src)
      sim.step_with_source(*src);
    else
      sim.step();
    if (rec) {
      energy_record(t_half);
      probe_record(t_half);
    }
    snapshot();
  }
  out.final_state = sim.state();
  return out;
}

}  // namespace

RunResult run(const SimConfig& cfg) { return run_impl(cfg, nullptr, nullptr, nullptr); }

RunResult run_custom(const SimConfig& cfg, const SourceFn& src,
                     std::vector<std::vector<double>>* e_frames,
                     std::vector<std::vector<double>>* full_frames) {
  return run_impl(cfg, &src, e_frames, full_frames);
}

DecayFit fit_decay_rate(const TimeSeries& series, double t_lo, double t_hi) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    const double t = series.times[i];
    if (t < t_lo || t > t_hi) continue;
    const double v = series.values[i];
    if (!(v > 0.0)) {
      std::ostringstream os;
      os << "non-positive value " << v << " at t = " << t << " in fit window";
      throw NonPositiveValues(os.str());
    }
    xs.push_back(t);
    ys.push_back(std::log(v));
  }
  if (xs.size() < 2) throw NonPositiveValues("fit window contains fewer than 2 samples");

  const std::size_t n = xs.size();
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  DecayFit fit;
  fit.slope = sxy / sxx;
  fit.rate = -0.5 * fit.slope;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pred = my + fit.slope * (xs[i] - mx);
    ss_res += (ys[i] - pred) * (ys[i] - pred);
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

SimConfig make_reference_config(const SimConfig& cfg, int factor) {
  SimConfig ref = cfg;
  const int n_small = cfg.grid.n_cells;
  const int pad = ((factor - 1) * n_small + 1) / 2;
  ref.grid.n_cells = n_small + 2 * pad;
  ref.grid.pml_left = PmlProfile{};
  ref.grid.pml_right = PmlProfile{};
  ref.variant = SystemVariant::Dispersion;
  ref.source.position = (pad + cfg.source.position * n_small) / double(ref.grid.n_cells);
  ref.probe_positions.clear();
  for (double frac : cfg.probe_positions)
    ref.probe_positions.push_back((pad + frac * n_small) / double(ref.grid.n_cells));
  return ref;
}

double reflection_coefficient(const SimConfig& cfg_small, const SimConfig& cfg_reference) {
  const int n_small = cfg_small.grid.n_cells;
  const int n_ref = cfg_reference.grid.n_cells;
  if (n_ref < 4 * n_small)
    throw std::invalid_argument("reference domain must be at least 4x larger");
  const int offset = (n_ref - n_small) / 2;

  const int probe_small = cfg_small.grid.phys_lo() + 10;
  const int probe_ref = probe_small + offset;

  // The reference must stay clean of its own wall returns for the whole
  // window: front speed is 1/sqrt(eps_inf) in these units.
  const double c_front = 1.0 / std::sqrt(cfg_reference.material.eps_inf);
  const double dxr = cfg_reference.grid.dx;
  const double x_src = cfg_reference.source.position * n_ref * dxr;
  const double x_probe = probe_ref * dxr;
  const double wall_r = n_ref * dxr;
  const double t_contam =
      std::min((x_src + x_probe) / c_front,
               ((wall_r - x_src) + (wall_r - x_probe)) / c_front);
  const double window = cfg_small.n_steps * cfg_small.resolved_dt();
  if (window >= t_contam) {
    std::ostringstream os;
    os << "window " << window << " reaches the reference wall return at "
       << t_contam;
    throw WindowTooLong(os.str());
  }

  std::vector<std::vector<double>> small_frames, ref_frames;
  SimConfig cs = cfg_small;
  SimConfig cr = cfg_reference;
  cs.record_stride = std::max(cs.n_steps, 1);  // the frames carry the signal
  cr.record_stride = std::max(cr.n_steps, 1);
  cr.n_steps = cfg_small.n_steps;
  cr.dt = cfg_small.resolved_dt();
  run_impl(cs, nullptr, &small_frames, nullptr);
  run_impl(cr, nullptr, &ref_frames, nullptr);

  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < small_frames.size(); ++n) {
    const double es = small_frames[n][probe_small];
    const double er = ref_frames[n][probe_ref];
    num = std::max(num, std::abs(es - er));
    den = std::max(den, std::abs(er));
  }
  if (den == 0.0) throw std::runtime_error("reference probe saw no signal");
  return 20.0 * std::log10(std::max(num / den, 1e-300));
}

}  // namespace dispml
