#include "homog/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace homog {

Json number_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json complex_json(Complex z) { return Json::array({number_json(z.real()), number_json(z.imag())}); }

Json matrix_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json field_json(const CVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_json(v(i)));
  return out;
}

Json point_json(const Point& p) {
  Json out = Json::array();
  for (double v : p) out.push_back(number_json(v));
  return out;
}

namespace {

Json numbers(std::span<const double> v) {
  Json out = Json::array();
  for (double x : v) out.push_back(number_json(x));
  return out;
}

Json matrices(const std::vector<CMatrix>& v) {
  Json out = Json::array();
  for (const auto& m : v) out.push_back(matrix_json(m));
  return out;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Json to_json(const ValidationReport& rep) {
  Json j;
  j["valid"] = rep.valid();
  j["c1"] = number_json(rep.c1);
  j["c2"] = number_json(rep.c2);
  j["g1"] = number_json(rep.g1);
  j["g2"] = number_json(rep.g2);
  j["hermitian_ok"] = rep.hermitian_ok;
  j["rank_ok"] = rep.rank_ok;
  j["sample_count"] = rep.sample_count;
  j["zeta_count"] = rep.zeta_count;
  j["max_hermitian_defect"] = number_json(rep.max_hermitian_defect);
  j["min_rank_ratio"] = number_json(rep.min_rank_ratio);
  j["offending"] = rep.offending;
  return j;
}

Json to_json(const HomogenizedCoefficients& hc) {
  Json j;
  j["d"] = hc.d;
  j["n"] = hc.n;
  j["m"] = hc.m;
  j["n_slow"] = hc.n_slow;
  j["length"] = number_json(hc.length);
  j["n_cell"] = hc.grid.n;
  j["max_discrepancy"] = number_json(hc.max_discrepancy());
  Json nodes = Json::object();
  for (std::size_t k = 0; k < hc.x_nodes.size(); ++k) {
    Json node;
    node["x"] = point_json(hc.x_nodes[k]);
    node["A2"] = matrix_json(hc.A2[k]);
    node["A1_left"] = matrix_json(hc.A1_left[k]);
    node["A1_right"] = matrix_json(hc.A1_right[k]);
    node["A1_zeroth"] = matrix_json(hc.A1_zeroth[k]);
    node["A0"] = matrix_json(hc.A0[k]);
    node["G0"] = matrix_json(hc.G0[k]);
    node["a_mean"] = matrices(hc.a_mean[k]);
    node["b"] = matrices(hc.b[k]);
    node["discrepancy_A2"] = number_json(hc.discrepancy_A2[k]);
    node["discrepancy_A1"] = number_json(hc.discrepancy_A1[k]);
    node["discrepancy_A0"] = number_json(hc.discrepancy_A0[k]);
    nodes[std::to_string(k)] = std::move(node);
  }
  j["nodes"] = std::move(nodes);
  return j;
}

Json to_json(const ConvergenceReport& rep) {
  Json j;
  j["rhs"] = rep.rhs_id;
  j["lambda"] = complex_json(rep.lambda);
  j["eps"] = numbers(rep.eps_list);
  j["n_phys"] = rep.n_phys;
  j["n_cell"] = rep.n_cell;
  j["err_L2"] = numbers(rep.err_L2);
  j["err_W1_corrected"] = numbers(rep.err_W1_corrected);
  j["err_W1_uncorrected"] = numbers(rep.err_W1_uncorrected);
  j["fd_error"] = numbers(rep.fd_error);
  j["residual_eps"] = numbers(rep.residual_eps);
  j["residual_0"] = numbers(rep.residual_0);
  j["max_discrepancy"] = numbers(rep.max_discrepancy);
  j["rate_L2"] = number_json(rep.rate_L2);
  j["rate_W1"] = number_json(rep.rate_W1);
  j["rate_W1_uncorrected"] = number_json(rep.rate_W1_uncorrected);
  j["fit_points"] = rep.fit_points;
  j["clean_prefix"] = rep.clean_prefix;
  j["floor_contaminated"] = rep.floor_contaminated;
  Json w;
  w["h0_hat"] = number_json(rep.window.h0_hat);
  w["mu0_hat"] = number_json(rep.window.mu0_hat);
  w["h_eps_hat"] = numbers(rep.window.h_eps_hat);
  w["mu_eps_hat"] = numbers(rep.window.mu_eps_hat);
  j["window"] = std::move(w);
  j["warnings"] = rep.warnings;
  j["passed"] = rep.passed();
  return j;
}

Json to_json(const SpectrumReport& rep) {
  Json j;
  j["k"] = rep.k;
  j["eps"] = numbers(rep.eps_list);
  j["n_phys"] = rep.n_phys;
  Json legs = Json::array();
  for (std::size_t l = 0; l < rep.eps_list.size(); ++l) {
    Json leg;
    leg["eps"] = number_json(rep.eps_list[l]);
    leg["lambda_eps"] = numbers(rep.eig_eps[l]);
    leg["lambda_0"] = numbers(rep.eig_0[l]);
    leg["gap"] = numbers(rep.gaps[l]);
    legs.push_back(std::move(leg));
  }
  j["legs"] = std::move(legs);
  j["shrink"] = numbers(rep.shrink);
  Json conv = Json::array();
  for (bool c : rep.converged) conv.push_back(c);
  j["converged"] = std::move(conv);
  j["monotone"] = rep.monotone;
  j["passed"] = rep.passed();
  return j;
}

Json to_json(const CellCorrectors& corr) {
  Json j;
  j["x"] = point_json(corr.x);
  j["n_cell"] = corr.grid.n;
  j["residual0"] = number_json(corr.residual0);
  j["residual1"] = number_json(corr.residual1);
  Json l1 = Json::array();
  Json l0 = Json::array();
  for (std::size_t k = 0; k < corr.lambda1.size(); ++k) {
    l1.push_back(matrix_json(corr.lambda1[k]));
    l0.push_back(matrix_json(corr.lambda0[k]));
  }
  j["lambda1"] = std::move(l1);
  j["lambda0"] = std::move(l0);
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string convergence_csv(const ConvergenceReport& rep) {
  std::string out = "eps,err_L2,err_W1_corrected,err_W1_uncorrected\n";
  for (std::size_t i = 0; i < rep.eps_list.size(); ++i) {
    out += g17(rep.eps_list[i]) + "," + g17(rep.err_L2[i]) + "," + g17(rep.err_W1_corrected[i]) +
           "," + g17(rep.err_W1_uncorrected[i]) + "\n";
  }
  return out;
}

std::string spectrum_csv(const SpectrumReport& rep) {
  std::string out = "eps,j,lambda_eps,lambda_0,gap\n";
  for (std::size_t l = 0; l < rep.eps_list.size(); ++l) {
    for (std::size_t j = 0; j < rep.gaps[l].size(); ++j) {
      out += g17(rep.eps_list[l]) + "," + std::to_string(j + 1) + "," + g17(rep.eig_eps[l][j]) +
             "," + g17(rep.eig_0[l][j]) + "," + g17(rep.gaps[l][j]) + "\n";
    }
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw Error("write to '" + path.string() + "' failed");
}

}  // namespace homog
