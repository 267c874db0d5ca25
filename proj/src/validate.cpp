#include "gdmc/validate.hpp"

#include "gdmc/experiments.hpp"
#include "gdmc/oracle.hpp"
#include "gdmc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace gdmc {

namespace {

double max_abs_diff(const Matrix &a, const Matrix &b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "max_abs_diff: dimension mismatch");
  return a.size() == 0 ? 0.0 : (a - b).cwiseAbs().maxCoeff();
}

Check make_check(std::string id, double metric, double threshold,
                 std::string detail) {
  Check c;
  c.id = std::move(id);
  c.metric = metric;
  c.threshold = threshold;
  c.passed = std::isfinite(metric) && metric <= threshold;
  c.detail = std::move(detail);
  return c;
}

// Instances of the oracle grid: p in {0.3, 1}, sigma in {0, 0.1}, per seed.
struct Instance {
  std::shared_ptr<const Observation> obs;
  Factor X;
  std::string label;
};

std::vector<Instance> instance_grid(const ValidateOptions &options, Index r) {
  std::vector<Instance> out;
  std::vector<double> eigenvalues;
  for (Index k = 0; k < r; ++k)
    eigenvalues.push_back(1.0 / static_cast<double>(k + 1));
  for (Index s = 0; s < options.seeds; ++s)
    for (double p : {0.3, 1.0})
      for (double sigma : {0.0, 0.1}) {
        const Seed seed = trial_seed(options.seed, r, s);
        Trial trial = make_trial(options.n, eigenvalues, p, sigma, seed);
        Instance inst;
        inst.obs = trial.obs;
        inst.X = gaussian_factor(options.n, r, 1.0 / std::sqrt(double(options.n)),
                                 trial.init_seed);
        std::ostringstream label;
        label << "r=" << r << " p=" << p << " sigma=" << sigma << " seed=" << s;
        inst.label = label.str();
        out.push_back(std::move(inst));
      }
  return out;
}

} // namespace

double OracleDiffs::max() const {
  return std::max({observed_product, mo_product, loo_product, loo_mo_product,
                   row_norms, loss, gradient});
}

OracleDiffs oracle_diffs(const Observation &obs, const Factor &X) {
  OracleDiffs d;
  const SampleMask &mask = obs.mask();
  const Matrix Xm = X;
  const oracle::DenseMatrix xx = oracle::outer(Xm);
  const oracle::DenseMatrix mo = oracle::observed_matrix(obs);
  const Matrix px = oracle::multiply(oracle::scaled_projection(mask, xx), Xm);
  const Matrix mox = oracle::multiply(mo, Xm);

  d.observed_product = max_abs_diff(observed_product(mask, X), px);
  d.mo_product = max_abs_diff(mo_product(obs, Xm), mox);
  d.gradient = max_abs_diff(gradient(obs, X), px - mox);
  d.loss = std::abs(loss(obs, X) - oracle::loss(obs, Xm));
  for (Index k = 0; k < X.cols(); ++k) {
    const Vector x = X.col(k);
    d.row_norms = std::max(
        d.row_norms, max_abs_diff(row_norm_estimates(mask, x),
                                  oracle::row_norms(mask, x)));
  }
  for (Index l = 0; l < obs.n(); ++l) {
    const Matrix lp =
        oracle::multiply(oracle::loo_projection(mask, l, xx), Xm);
    d.loo_product =
        std::max(d.loo_product, max_abs_diff(loo_product(mask, l, X), lp));
    const Matrix lm = oracle::multiply(oracle::loo_matrix(obs, l), Xm);
    d.loo_mo_product =
        std::max(d.loo_mo_product, max_abs_diff(loo_mo_product(obs, l, Xm), lm));
  }
  return d;
}

GradientCheck gradient_check(const Observation &obs, const Vector &x) {
  const Vector g = gradient(obs, x);
  const auto f = [&](const Vector &v) { return oracle::loss(obs, v); };
  const Vector fd = oracle::fd_gradient(f, x, oracle::fd_step(x));
  GradientCheck out;
  for (Index i = 0; i < x.size(); ++i) {
    const double diff = std::abs(g[i] - fd[i]);
    const double scale = std::max(std::abs(g[i]), std::abs(fd[i]));
    out.violation = std::max(out.violation, diff / (1e-10 + 1e-5 * scale));
    out.max_rel = std::max(out.max_rel, diff / std::max(scale, 1e-300));
  }
  return out;
}

Index asymmetric_entries(const std::vector<std::pair<Index, Index>> &entries) {
  const std::set<std::pair<Index, Index>> present(entries.begin(),
                                                  entries.end());
  Index missing = 0;
  for (const auto &[i, j] : entries)
    if (i != j && !present.count({j, i}))
      ++missing;
  return missing;
}

std::vector<Check> run_checks(const ValidateOptions &options) {
  std::vector<Check> checks;

  // Sparse operators against dense loops.
  {
    OracleDiffs worst;
    std::string where;
    for (Index r : {Index{1}, Index{2}})
      for (const auto &inst : instance_grid(options, r)) {
        const OracleDiffs d = oracle_diffs(*inst.obs, inst.X);
        if (d.max() > worst.max())
          where = inst.label;
        worst.observed_product = std::max(worst.observed_product, d.observed_product);
        worst.mo_product = std::max(worst.mo_product, d.mo_product);
        worst.loo_product = std::max(worst.loo_product, d.loo_product);
        worst.loo_mo_product = std::max(worst.loo_mo_product, d.loo_mo_product);
        worst.row_norms = std::max(worst.row_norms, d.row_norms);
        worst.loss = std::max(worst.loss, d.loss);
        worst.gradient = std::max(worst.gradient, d.gradient);
      }
    const std::pair<const char *, double> items[] = {
        {"oracle.observed_product", worst.observed_product},
        {"oracle.mo_product", worst.mo_product},
        {"oracle.loo_product", worst.loo_product},
        {"oracle.loo_mo_product", worst.loo_mo_product},
        {"oracle.row_norms", worst.row_norms},
        {"oracle.loss", worst.loss},
        {"oracle.gradient", worst.gradient}};
    for (const auto &[id, value] : items)
      checks.push_back(make_check(id, value, 1e-12,
                                  "max entrywise deviation; worst instance " +
                                      where));
  }

  // Finite differences.
  {
    double violation = 0.0, rel = 0.0;
    for (const auto &inst : instance_grid(options, 1)) {
      const GradientCheck g = gradient_check(*inst.obs, inst.X.col(0));
      violation = std::max(violation, g.violation);
      rel = std::max(rel, g.max_rel);
    }
    std::ostringstream os;
    os << "max relative error " << rel << " (atol 1e-10, rtol 1e-5)";
    checks.push_back(make_check("solver.gradient_fd", violation, 1.0, os.str()));
  }

  // Both gradient assemblies.
  {
    double worst = 0.0;
    for (const auto &inst : instance_grid(options, 1)) {
      const Vector x = inst.X.col(0);
      worst = std::max(worst, max_abs_diff(gradient(*inst.obs, x),
                                           gradient_sampling_form(*inst.obs, x)));
    }
    checks.push_back(make_check("solver.gradient_forms", worst, 1e-12,
                                "product form vs sampling-operator form"));
  }

  // Mask symmetry on the directed adjacency.
  {
    Index missing = 0;
    for (Index s = 0; s < options.seeds; ++s) {
      const SampleMask mask =
          SampleMask::sample(options.n, 0.3, trial_seed(options.seed, 7, s));
      auto entries = mask.directed_entries();
      if (options.inject_fault == "mask_symmetry") {
        const auto it = std::find_if(entries.begin(), entries.end(),
                                     [](const auto &e) { return e.first != e.second; });
        if (it != entries.end())
          entries.erase(it);
      }
      missing += asymmetric_entries(entries);
    }
    checks.push_back(make_check("observation.mask_symmetry",
                                static_cast<double>(missing), 0.0,
                                "directed entries without a transpose"));
  }

  // Full observation: main, reference and leave-one-out sequences coincide.
  {
    double dev = 0.0, loo = 0.0;
    for (Index s = 0; s < options.seeds; ++s) {
      const Trial trial =
          make_trial(options.n, {1.0}, 1.0, 0.0, trial_seed(options.seed, 8, s));
      SolverConfig sc;
      sc.T = 100;
      sc.beta0 = 1.0 / static_cast<double>(options.n);
      sc.record_every = 1;
      sc.loo_indices = {0, options.n / 2, options.n - 1};
      const TrajectoryRecord rec = gd_run(*trial.obs, sc, trial.init_seed);
      for (double v : rec.series.dev_ref_inf)
        dev = std::max(dev, v);
      for (const auto &track : rec.series.loo)
        for (double v : track.dev)
          loo = std::max(loo, v);
    }
    checks.push_back(make_check("solver.full_observation_reference", dev, 1e-12,
                                "max_t ||x - x_ref||_inf at p = 1, sigma = 0"));
    checks.push_back(make_check("solver.full_observation_loo", loo, 0.0,
                                "max_t ||x - x^(l)||_2 at p = 1, sigma = 0"));
  }

  // Closed form and scalar recursion of the fully observed dynamics.
  {
    double vec = 0.0, pyth = 0.0;
    for (Index s = 0; s < options.seeds; ++s) {
      const Seed seed = trial_seed(options.seed, 9, s);
      const GroundTruth gt = generate_ground_truth(
          options.n, {1.0}, derive_seed(seed, {stream::kGroundTruth}));
      const Vector x0 =
          init_point(options.n, 1, 0.01, derive_seed(seed, {stream::kInit})).col(0);
      const FullObsResult run = full_obs_run(gt, x0, 0.1, 300);
      for (Index t = 0; t < run.trajectory.cols(); ++t) {
        const Vector x = run.trajectory.col(t);
        vec = std::max(vec, (x - run.coeffs.reconstruct(t)).cwiseAbs().maxCoeff() /
                                std::max(1.0, x.cwiseAbs().maxCoeff()));
        const auto k = static_cast<std::size_t>(t);
        const double a = run.scalars.alpha[k], b = run.scalars.beta[k],
                     g = run.scalars.gamma[k];
        pyth = std::max(pyth, std::abs(b * b - a * a - g * g) / (b * b));
      }
    }
    checks.push_back(make_check("solver.closed_form", vec, 1e-10,
                                "iterative vs closed-form trajectory"));
    checks.push_back(make_check("solver.scalar_pythagoras", pyth, 1e-10,
                                "relative |beta^2 - alpha^2 - gamma^2|"));
  }

  // Power iteration against dense Jacobi.
  {
    double eig = 0.0, vec = 0.0, norm = 0.0;
    for (Index s = 0; s < options.seeds; ++s) {
      const Trial trial =
          make_trial(options.n, {1.0}, 0.3, 0.1, trial_seed(options.seed, 10, s));
      const Observation &obs = *trial.obs;
      const oracle::DenseMatrix mo = oracle::observed_matrix(obs);
      const oracle::JacobiResult jac = oracle::jacobi_eigen(mo);
      Index top = 0;
      for (Index k = 1; k < jac.eigenvalues.size(); ++k)
        if (std::abs(jac.eigenvalues[k]) > std::abs(jac.eigenvalues[top]))
          top = k;
      PowerOptions po;
      po.tol = 1e-10;
      po.max_iter = 100000;
      const EigenPair ep = top_eigenpair(
          [&](const Vector &v) { return mo_product(obs, v); }, options.n, po);
      eig = std::max(eig, std::abs(ep.lambda - jac.eigenvalues[top]) /
                              std::abs(jac.eigenvalues[top]));
      const Vector u = jac.eigenvectors.col(top);
      vec = std::max(vec, std::min((ep.v - u).norm(), (ep.v + u).norm()));

      oracle::DenseMatrix h = mo;
      const oracle::DenseMatrix star = oracle::planted(obs.ground());
      for (Index i = 0; i < options.n; ++i)
        for (Index j = 0; j < options.n; ++j)
          h(i, j) -= star(i, j);
      const oracle::JacobiResult hj = oracle::jacobi_eigen(h);
      const double exact = hj.eigenvalues.cwiseAbs().maxCoeff();
      const NormEstimate est = spectral_norm(
          [&](const Vector &v) {
            return Vector(mo_product(obs, v) - obs.ground().apply(v));
          },
          options.n, po);
      norm = std::max(norm, std::abs(est.value - exact) / exact);
    }
    checks.push_back(make_check("diagnostics.top_eigenvalue", eig, 1e-8,
                                "relative error vs Jacobi"));
    checks.push_back(make_check("diagnostics.top_eigenvector", vec, 1e-4,
                                "sign-aligned distance to Jacobi eigenvector"));
    checks.push_back(make_check("diagnostics.spectral_norm", norm, 1e-6,
                                "relative error of ||M^o - M*|| vs Jacobi"));
  }

  // Procrustes: exact recovery of a planted rotation, and optimality against
  // random orthogonal matrices.
  {
    double planted = 0.0, excess = 0.0;
    const Index r = 3;
    for (Index s = 0; s < options.seeds; ++s) {
      Rng rng(trial_seed(options.seed, 11, s));
      const Matrix X = gaussian_factor(options.n, r, 1.0, rng.next_u64());
      const Matrix Q = orthonormalize(gaussian_factor(r, r, 1.0, rng.next_u64()));
      const Matrix Y = X * Q;
      planted = std::max(planted, procrustes_error(X, Y) / Y.norm());
      const Matrix Z = Y + gaussian_factor(options.n, r, 0.3, rng.next_u64());
      const double best = procrustes_error(X, Z);
      for (int trial = 0; trial < 200; ++trial) {
        const Matrix R = orthonormalize(gaussian_factor(r, r, 1.0, rng.next_u64()));
        excess = std::max(excess, best - (X * R - Z).norm());
      }
    }
    checks.push_back(make_check("diagnostics.procrustes_planted", planted, 1e-12,
                                "relative error for Y = X Q"));
    checks.push_back(make_check("diagnostics.procrustes_optimal", excess, 1e-12,
                                "excess over best random rotation"));
  }
  return checks;
}

io::Json to_json(const std::vector<Check> &checks) {
  io::Json doc;
  io::Json list = io::Json::array();
  bool all = true;
  for (const auto &c : checks) {
    list.push_back({{"id", c.id},
                    {"passed", c.passed},
                    {"metric", c.metric},
                    {"threshold", c.threshold},
                    {"detail", c.detail}});
    all = all && c.passed;
  }
  doc["passed"] = all;
  doc["checks"] = list;
  return doc;
}

} // namespace gdmc
