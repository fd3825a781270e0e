#include "homog/matrix_market.hpp"
#include "homog/problem_io.hpp"
#include "homog/report_io.hpp"
#include "homog/scenarios.hpp"
#include "homog/toml_lite.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace homog;

namespace {

std::filesystem::path temp_dir(const std::string& leaf) {
  auto p = std::filesystem::temp_directory_path() / ("homog_test_io_" + leaf);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

const char* kHarmonicToml = R"toml(
name = "harmonic"
[bstruct]
d = 1
n = 1
m = 1
B = [[[1]]]

[A]
scalar = "2 + sin(2*pi*xi1)"

[run]
n_cell = 64
periods = [8, 16, 32]
)toml";

std::size_t parse_error_line(const std::string& text) {
  try {
    parse_toml(text);
  } catch (const ParseError& e) {
    return e.position();
  }
  return 0;
}

}  // namespace

TEST(TomlLite, ScalarsTablesAndArrays) {
  const auto j = parse_toml(R"(
title = "x"  # comment
count = 3
ratio = -2.5e-3
flag = true
[outer.inner]
list = [1, [2.0, "s"], {k = 1}]
dotted.key = "v"
)");
  EXPECT_EQ(j["title"], "x");
  EXPECT_EQ(j["count"], 3);
  EXPECT_TRUE(j["count"].is_number_integer());
  EXPECT_DOUBLE_EQ(j["ratio"].get<double>(), -2.5e-3);
  EXPECT_EQ(j["flag"], true);
  EXPECT_EQ(j["outer"]["inner"]["list"][1][1], "s");
  EXPECT_EQ(j["outer"]["inner"]["list"][2]["k"], 1);
  EXPECT_EQ(j["outer"]["inner"]["dotted"]["key"], "v");
}

TEST(TomlLite, ErrorsReportLineNumbers) {
  EXPECT_EQ(parse_error_line("a = 1\nb = \n"), 2u);
  EXPECT_EQ(parse_error_line("a = 1\n\n[[tables]]\n"), 3u);
  EXPECT_EQ(parse_error_line("a = \"open\n"), 1u);
  EXPECT_EQ(parse_error_line("a = 1\na = 2\n"), 2u);
}

TEST(ProblemIo, LoadsHarmonicProblem) {
  const Problem p = problem_from_json(parse_toml(kHarmonicToml));
  EXPECT_EQ(p.cs.name, "harmonic");
  EXPECT_EQ(p.cs.d(), 1);
  EXPECT_EQ(p.run["n_cell"], 64);
  EXPECT_NO_THROW(validate(p.cs));
  const Point x = {0.0};
  const Point xi = {0.25};
  EXPECT_NEAR(p.cs.A(x, xi)(0, 0).real(), 3.0, 1e-15);
  EXPECT_EQ(max_abs(p.cs.G(x, xi) - CMatrix::Identity(1, 1)), 0.0);
}

TEST(ProblemIo, FileRoundTrip) {
  const auto dir = temp_dir("files");
  {
    std::ofstream(dir / "p.toml") << kHarmonicToml;
  }
  const Problem p = load_problem_file(dir / "p.toml");
  EXPECT_EQ(p.cs.name, "harmonic");
  EXPECT_THROW(load_problem_file(dir / "missing.toml"), ProblemError);
  {
    std::ofstream(dir / "p.json")
        << R"({"bstruct": {"d": 1, "n": 1, "m": 1, "B": [[[1]]]}, "A": {"scalar": 2}})";
  }
  EXPECT_EQ(load_problem_file(dir / "p.json").cs.m(), 1);
}

TEST(ProblemIo, StructuralErrors) {
  const auto with = [](const std::string& extra) { return parse_toml(std::string(kHarmonicToml) + extra); };
  EXPECT_THROW(problem_from_json(parse_toml("[A]\nscalar = 1\n")), ProblemError);
  EXPECT_THROW(problem_from_json(parse_toml("[bstruct]\nd = 1\nn = 1\nm = 1\nB = [[[1]]]\n")),
               ProblemError);
  EXPECT_THROW(problem_from_json(with("[V]\nentries = [[1, 2]]\n")), ProblemError);
  EXPECT_THROW(problem_from_json(with("[a.2]\nscalar = 1\n")), ProblemError);
  EXPECT_THROW(problem_from_json(with("[G]\nscalar = \"sin(\"\n")), ParseError);
  EXPECT_THROW(problem_from_json(with("[G]\nscalar = \"1 + xi1\"\n")), PeriodicityError);
  EXPECT_THROW(problem_from_json(with("[b.1]\nscalar = \"cos(2*pi*xi1)\"\n")), ProblemError);
}

TEST(ProblemIo, ComplexEntries) {
  const Problem p = problem_from_json(parse_toml(std::string(kHarmonicToml) +
                                                 "[V]\nscalar = [\"1\", 0.5]\n"));
  const Complex v = p.cs.V(Point{0.0}, Point{0.0})(0, 0);
  EXPECT_EQ(v, Complex(1.0, 0.5));
  EXPECT_THROW(validate(p.cs), ValidationFailed);
}

TEST(ReportIo, NonFiniteSentinels) {
  EXPECT_EQ(number_json(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(number_json(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(number_json(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(number_json(0.25), 0.25);
  EXPECT_EQ(complex_json(Complex(1, -2)).dump(), "[1.0,-2.0]");
}

TEST(ReportIo, DeterministicDumps) {
  const Preset p = make_preset("harmonic1d");
  const std::vector<int> periods = {8, 16, 32};
  const auto eps = eps_sweep(periods, kTwoPi);
  const std::vector<ScalarField> f = {ScalarField::parse("sin(x1)")};
  const std::string a = dump(to_json(run_resolvent_convergence(p.cs, {}, -1.0, f, eps)));
  const std::string b = dump(to_json(run_resolvent_convergence(p.cs, {}, -1.0, f, eps)));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.back(), '\n');
  const HomogenizedCoefficients hc = homogenize(p.cs, 1, CellGrid(1, 32));
  EXPECT_EQ(dump(to_json(hc)), dump(to_json(hc)));
  const Json j = to_json(hc);
  EXPECT_TRUE(j.dump().find("\"0\"") != std::string::npos);
}

TEST(ReportIo, SpectrumShrinkInfinityIsAString) {
  const Preset p = make_preset("constant1d");
  const std::vector<int> periods = {8, 16, 32};
  const SpectrumReport r = run_spectrum_convergence(p.cs, {}, 1, eps_sweep(periods, kTwoPi));
  const std::string text = dump(to_json(r));
  if (!std::isfinite(r.shrink[0])) EXPECT_NE(text.find("\"inf\""), std::string::npos);
  EXPECT_EQ(Json::parse(text).dump(), to_json(r).dump());
}

TEST(ReportIo, CsvFormats) {
  ConvergenceReport r;
  r.eps_list = {0.5, 0.25};
  r.err_L2 = {0.1, 1.0 / 3.0};
  r.err_W1_corrected = {0.2, 0.0};
  r.err_W1_uncorrected = {0.3, 0.4};
  const std::string csv = convergence_csv(r);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "eps,err_L2,err_W1_corrected,err_W1_uncorrected");
  std::getline(is, line);
  EXPECT_EQ(line, "0.5,0.10000000000000001,0.20000000000000001,0.29999999999999999");
  std::getline(is, line);
  EXPECT_EQ(line, "0.25,0.33333333333333331,0,0.40000000000000002");

  SpectrumReport s;
  s.k = 1;
  s.eps_list = {0.5};
  s.eig_eps = {{2.0}};
  s.eig_0 = {{1.5}};
  s.gaps = {{0.5}};
  std::istringstream ss(spectrum_csv(s));
  std::getline(ss, line);
  EXPECT_EQ(line, "eps,j,lambda_eps,lambda_0,gap");
  std::getline(ss, line);
  EXPECT_EQ(line, "0.5,1,2,1.5,0.5");
}

TEST(ReportIo, WriteTextCreatesDirectories) {
  const auto dir = temp_dir("write");
  write_text(dir / "a" / "b" / "c.txt", "hello\n");
  std::ifstream in(dir / "a" / "b" / "c.txt");
  std::string s;
  std::getline(in, s);
  EXPECT_EQ(s, "hello");
}

TEST(MatrixMarket, RoundTripIsExact) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> N(0.0, 1.0);
  std::vector<Triplet> t;
  for (int k = 0; k < 40; ++k) t.emplace_back(k % 13, (7 * k) % 11, Complex(N(rng), N(rng)));
  SparseC m(13, 11);
  m.setFromTriplets(t.begin(), t.end());
  std::stringstream ss;
  write_matrix_market(ss, m);
  EXPECT_EQ(ss.str().rfind("%%MatrixMarket matrix coordinate complex general", 0), 0u);
  const SparseC back = read_matrix_market(ss);
  ASSERT_EQ(back.rows(), 13);
  ASSERT_EQ(back.cols(), 11);
  EXPECT_EQ(CMatrix(back), CMatrix(m));
}

TEST(MatrixMarket, RealInputAndErrors) {
  std::istringstream real("%%MatrixMarket matrix coordinate real general\n% c\n2 2 2\n1 1 1.5\n2 1 -2\n");
  const SparseC m = read_matrix_market(real);
  EXPECT_EQ(m.coeff(0, 0), Complex(1.5));
  EXPECT_EQ(m.coeff(1, 0), Complex(-2.0));
  std::istringstream bad("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n");
  try {
    read_matrix_market(bad);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 3u);
  }
  std::istringstream header("%%MatrixMarket matrix array real general\n2 2\n");
  EXPECT_THROW(read_matrix_market(header), ParseError);
  EXPECT_THROW(read_matrix_market(std::filesystem::path("/nonexistent/x.mtx")), Error);
}

TEST(MatrixMarket, OperatorExportToFile) {
  const auto dir = temp_dir("mm");
  const Preset p = make_preset("magnetic2d");
  const TorusGrid g(2, kTwoPi, 16);
  const DiscreteOperator H = assemble_H_eps(p.cs, g, EpsilonChoice::from_periods(2, kTwoPi));
  write_matrix_market(dir / "H.mtx", H.matrix);
  EXPECT_EQ(CMatrix(read_matrix_market(dir / "H.mtx")), CMatrix(H.matrix));
}
