// End-to-end tests of the ggr-lab executable: each case writes a small
// configuration, spawns the real binary, and inspects exit code and output.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "ggr/envelopes.hpp"
#include "ggr/graphs.hpp"
#include "ggr/thermo.hpp"

namespace {

namespace fs = std::filesystem;
using Catch::Approx;

fs::path temp_file(const std::string& stem) {
  static int counter = 0;
  return fs::temp_directory_path() /
         ("ggr_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + "_" + stem);
}

std::string write_config(const std::string& text) {
  const fs::path p = temp_file("config.ini");
  std::ofstream out(p);
  out << text;
  REQUIRE(out.good());
  return p.string();
}

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const fs::path capture = temp_file("capture.txt");
  const std::string cmd =
      std::string(GGR_LAB_BINARY) + " " + args + " > " + capture.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  RunResult res;
  res.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream in(capture);
  std::stringstream ss;
  ss << in.rdbuf();
  res.out = ss.str();
  return res;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

// lines that are neither comments nor blank: the CSV column header plus rows
std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> out;
  for (auto& l : split_lines(text))
    if (!l.empty() && l[0] != '#') out.push_back(l);
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

int count_prefixed(const std::string& text, const std::string& prefix) {
  int n = 0;
  for (auto& l : split_lines(text))
    if (l.rfind(prefix, 0) == 0) ++n;
  return n;
}

} // namespace

TEST_CASE("scatter command reports closed-form hard-core columns", "[cli]") {
  const std::string cfg = write_config("[scatter]\nd = 3\nkind = hard_core\na0 = 1.0\n");
  const RunResult res = run_cli("scatter --config " + cfg);
  REQUIRE(res.code == 0);

  const auto lines = split_lines(res.out);
  REQUIRE(lines.size() >= 3);
  REQUIRE(lines[0].rfind("# ggr-lab 0.1.0 seed=0 config-hash=", 0) == 0);
  REQUIRE(lines[0].size() == std::string("# ggr-lab 0.1.0 seed=0 config-hash=").size() + 16);

  const auto rows = data_lines(res.out);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[0] == "d,kind,a0_or_R,V0,a,energy_integral,c_d_a_d_residual");
  const auto cols = split_csv(rows[1]);
  REQUIRE(cols.size() == 7);
  CHECK(cols[0] == "3");
  CHECK(cols[1] == "hard_core");
  CHECK(std::stod(cols[2]) == Approx(1.0));
  CHECK(std::stod(cols[4]) == Approx(1.0).epsilon(1e-6));
  CHECK(std::stod(cols[5]) ==
        Approx(ggr::pwave_energy_constant(3)).epsilon(1e-6)); // c_3 * a^3 with a = 1
  CHECK(std::stod(cols[6]) <= 1e-6);
}

TEST_CASE("scatter command handles degenerate and bad inputs", "[cli]") {
  SECTION("zero-height soft sphere scatters trivially") {
    const std::string cfg =
        write_config("[scatter]\nd = 2\nkind = soft_sphere\nV0 = 0.0\nR = 1.0\n");
    const RunResult res = run_cli("scatter --config " + cfg);
    REQUIRE(res.code == 0);
    const auto cols = split_csv(data_lines(res.out).at(1));
    CHECK(std::abs(std::stod(cols[4])) <= 1e-12);
    CHECK(std::abs(std::stod(cols[5])) <= 1e-12);
  }
  SECTION("missing kind names the offending key") {
    const std::string cfg = write_config("[scatter]\nd = 3\na0 = 1.0\n");
    const RunResult res = run_cli("scatter --config " + cfg);
    REQUIRE(res.code == 2);
    CHECK(res.out.find("scatter.kind") != std::string::npos);
  }
  SECTION("mismatched tabulated arrays are an input error") {
    const std::string cfg =
        write_config("[scatter]\nd = 3\nkind = tabulated\nr = 0.1,0.2,0.3\nv = 1.0,0.5\n");
    REQUIRE(run_cli("scatter --config " + cfg).code == 2);
  }
  SECTION("unreadable config path is an input error") {
    REQUIRE(run_cli("scatter --config /no/such/file.ini").code == 2);
  }
  SECTION("argument-parser failures are input errors") {
    REQUIRE(run_cli("").code == 2);                    // missing subcommand
    REQUIRE(run_cli("scatter").code == 2);             // missing --config
    REQUIRE(run_cli("scatter --bogus-flag x").code == 2);
  }
}

TEST_CASE("thermo command sweeps the activity grid and passes its self-test", "[cli]") {
  const std::string cfg = write_config(
      "[thermo]\nd = 3\nbeta = 1.0\nlog_z_min = 0.0\nlog_z_max = 100.0\npoints = 5\n");
  const RunResult res = run_cli("thermo --selftest --config " + cfg);
  REQUIRE(res.code == 0);
  REQUIRE(res.out.find("# selftest ok") != std::string::npos);

  const auto rows = data_lines(res.out);
  REQUIRE(rows.size() == 1 + 5);
  REQUIRE(rows[0] == "d,beta,log_z,zeta,psi0,rho0,coeff,coeff_over_zeroT_limit");
  const auto first = split_csv(rows[1]), last = split_csv(rows[5]);
  CHECK(std::stod(first[2]) == Approx(0.0).margin(1e-12));
  CHECK(std::stod(first[3]) == Approx(1.0)); // zeta = 1 + |log z|
  CHECK(std::stod(last[2]) == Approx(100.0));
  CHECK(std::stod(last[3]) == Approx(101.0));
  // deep degeneracy: the coefficient sits on its zero-temperature limit
  CHECK(std::stod(last[7]) == Approx(1.0).epsilon(1e-3));
  // columns are mutually consistent
  CHECK(std::stod(last[6]) ==
        Approx(std::stod(last[7]) * ggr::zero_temperature_coefficient(3)).epsilon(1e-12));
}

TEST_CASE("thermo output is identical across thread counts", "[cli]") {
  const std::string cfg = write_config(
      "[thermo]\nd = 2\nbeta = 0.7\nlog_z_min = -3.0\nlog_z_max = 6.0\npoints = 17\n");
  const std::string out1 = temp_file("t1.csv").string();
  const std::string out2 = temp_file("t2.csv").string();
  REQUIRE(run_cli("thermo --config " + cfg + " --out " + out1).code == 0);
  REQUIRE(run_cli("thermo --config " + cfg + " --threads 3 --out " + out2).code == 0);
  CHECK(slurp(out1) == slurp(out2));
}

TEST_CASE("diagrams command dumps dual-engine values and verifies counts", "[cli]") {
  const std::string cfg = write_config(
      "[diagrams]\nd = 1\nm = 6\nh = 0.5\nbeta = 1.0\nmu = -0.3\n"
      "eta = 0.3\nwidth = 1.0\nq = 1\np_max = 2\next = 0\n");
  const RunResult res = run_cli("diagrams --verify --config " + cfg);
  REQUIRE(res.code == 0);
  REQUIRE(res.out.find("# verify ok engines+counts") != std::string::npos);

  // one line per diagram, counts matching the enumeration library
  const auto n1 = static_cast<int>(ggr::tilde_linked_diagrams(1, 1).size());
  const auto n2 = static_cast<int>(ggr::tilde_linked_diagrams(1, 2).size());
  REQUIRE(n1 > 0);
  REQUIRE(n2 > 0);
  CHECK(count_prefixed(res.out, "1 1 |") == n1);
  CHECK(count_prefixed(res.out, "1 2 |") == n2);

  // dump lines carry five |-separated fields with two trailing floats
  for (const auto& line : data_lines(res.out)) {
    const auto bars = std::count(line.begin(), line.end(), '|');
    REQUIRE(bars == 4);
    std::stringstream tail(line.substr(line.rfind('|') + 1));
    double re = 0.0, im = 0.0;
    tail >> re >> im;
    REQUIRE(std::isfinite(re));
    // single real external configuration: values are real
    REQUIRE(std::abs(im) <= 1e-10 * std::max(1.0, std::abs(re)));
  }
}

TEST_CASE("diagrams command guards order and validates externals", "[cli]") {
  SECTION("order guard trips before any work") {
    const std::string cfg = write_config(
        "[diagrams]\nd = 1\nm = 6\nh = 0.5\nbeta = 1.0\nmu = -0.3\n"
        "eta = 0.3\nwidth = 1.0\nq = 7\np_max = 1\n");
    REQUIRE(run_cli("diagrams --config " + cfg).code == 3);
  }
  SECTION("external list must match q") {
    const std::string cfg = write_config(
        "[diagrams]\nd = 1\nm = 6\nh = 0.5\nbeta = 1.0\nmu = -0.3\n"
        "eta = 0.3\nwidth = 1.0\nq = 2\np_max = 1\next = 0\n");
    REQUIRE(run_cli("diagrams --config " + cfg).code == 2);
  }
  SECTION("external site must live on the torus") {
    const std::string cfg = write_config(
        "[diagrams]\nd = 1\nm = 6\nh = 0.5\nbeta = 1.0\nmu = -0.3\n"
        "eta = 0.3\nwidth = 1.0\nq = 1\np_max = 1\next = 99\n");
    REQUIRE(run_cli("diagrams --config " + cfg).code == 2);
  }
}

TEST_CASE("oracle command reports exact-versus-truncated comparisons", "[cli]") {
  SECTION("trivial pair factor gives a zero-residual table") {
    const std::string cfg = write_config(
        "[oracle]\nM = 6,8\nbeta = 1.0\nmu = -0.5\neta = 0.0\nwidth = 1.0\np_max = 3\n");
    const RunResult res = run_cli("oracle --config " + cfg);
    REQUIRE(res.code == 0);
    const auto rows = data_lines(res.out);
    REQUIRE(rows.size() == 1 + 2);
    REQUIRE(rows[0] ==
            "M,beta,mu,rho0Ig,rho0IgIgamma,p_max,exact_logZJ_over_Z,truncated,residual,"
            "tail_estimate,entropy_margin");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto cols = split_csv(rows[i]);
      REQUIRE(cols.size() == 11);
      CHECK(std::abs(std::stod(cols[6])) <= 1e-10); // exact log(Z_J/Z)
      CHECK(std::abs(std::stod(cols[8])) <= 1e-10); // residual
      CHECK(std::stod(cols[10]) >= -1e-8);          // entropy margin
    }
  }
  SECTION("weak coupling: residual within tail and decreasing in the order") {
    const std::string base =
        "[oracle]\nM = 8\nbeta = 1.0\nmu = -0.5\neta = 0.25\nwidth = 1.0\n";
    const RunResult res4 = run_cli("oracle --config " + write_config(base + "p_max = 4\n"));
    const RunResult res2 = run_cli("oracle --config " + write_config(base + "p_max = 2\n"));
    REQUIRE(res4.code == 0);
    REQUIRE(res2.code == 0);
    const auto c4 = split_csv(data_lines(res4.out).at(1));
    const auto c2 = split_csv(data_lines(res2.out).at(1));
    const double coupling = std::stod(c4[4]);
    INFO("rho0 I_g I_gamma = " << coupling);
    CHECK(coupling < 0.2);
    CHECK(std::stod(c4[8]) <= std::stod(c4[9])); // residual <= tail estimate
    CHECK(std::stod(c4[8]) < std::stod(c2[8]));  // deeper truncation is better
    CHECK(std::stod(c4[10]) >= -1e-8);
  }
  SECTION("ring beyond the Fock guard is a resource error") {
    const std::string cfg = write_config(
        "[oracle]\nM = 16\nbeta = 1.0\nmu = -0.5\neta = 0.2\nwidth = 1.0\np_max = 2\n");
    REQUIRE(run_cli("oracle --config " + cfg).code == 3);
  }
}

TEST_CASE("bound command tracks the regime split along the threshold curve", "[cli]") {
  const std::string base =
      "[bound]\nd = 3\nx_min = 1e-6\nx_max = 1e-3\nx_points = 6\nzeta_mode = threshold\n";
  const RunResult low = run_cli("bound --config " + write_config(base + "zeta_factor = 4.0\n"));
  const RunResult high =
      run_cli("bound --config " + write_config(base + "zeta_factor = 0.25\n"));
  REQUIRE(low.code == 0);
  REQUIRE(high.code == 0);
  const auto low_rows = data_lines(low.out);
  const auto high_rows = data_lines(high.out);
  REQUIRE(low_rows.size() == 1 + 6);
  REQUIRE(low_rows[0] == "d,a,rho0,x,log_z,zeta,regime,b_choice,leading_term,delta_d,valid");
  for (std::size_t i = 1; i < low_rows.size(); ++i) {
    const auto cols = split_csv(low_rows[i]);
    CHECK(cols[6] == "low");
    CHECK(cols[10] == "1");
  }
  for (std::size_t i = 1; i < high_rows.size(); ++i) {
    const auto cols = split_csv(high_rows[i]);
    CHECK(cols[6] == "high");
    CHECK(cols[10] == "1");
  }
}

TEST_CASE("bound command flags diluteness violations without failing", "[cli]") {
  const std::string cfg = write_config(
      "[bound]\nd = 3\nx_min = 1e-4\nx_max = 2.0\nx_points = 5\nlog_z = 1.0\n");
  const RunResult res = run_cli("bound --config " + cfg);
  REQUIRE(res.code == 0);
  const auto rows = data_lines(res.out);
  REQUIRE(rows.size() == 1 + 5);
  const auto first = split_csv(rows[1]);
  const auto last = split_csv(rows[5]);
  CHECK(first[10] == "1");
  CHECK(std::stod(first[9]) > 0.0);
  CHECK(last[6] == "none"); // x = 2 violates the diluteness hypothesis
  CHECK(last[10] == "0");
  CHECK(std::stod(last[9]) == 0.0);
  int invalid = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (split_csv(rows[i])[10] == "0") ++invalid;
  CHECK(invalid >= 1);
}

TEST_CASE("bound threshold sweep reproduces the 1/39 exponent", "[cli]") {
  const std::string cfg = write_config(
      "[bound]\nd = 3\nx_min = 1e-6\nx_max = 1e-2\nx_points = 13\nzeta_mode = threshold\n");
  const RunResult res = run_cli("bound --config " + cfg);
  REQUIRE(res.code == 0);
  std::vector<double> xs, ys;
  const auto rows = data_lines(res.out);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto cols = split_csv(rows[i]);
    REQUIRE(cols[10] == "1");
    const double x = std::stod(cols[3]);
    const double delta = std::stod(cols[9]);
    // remove the slowly varying log factor of the threshold-curve envelope
    xs.push_back(x);
    ys.push_back(delta * std::pow(std::abs(std::log(x)), -12.0 / 13.0));
  }
  CHECK(ggr::fit_loglog_slope(xs, ys) == Approx(1.0 / 39.0).margin(0.01));
}

TEST_CASE("bound command writes plot companions and verifies its cutoff", "[cli]") {
  const std::string cfg = write_config(
      "[bound]\nd = 2\nx_min = 1e-6\nx_max = 1e-4\nx_points = 4\nlog_z = 0.0,2.0\n");
  const std::string out = temp_file("bound.csv").string();
  const RunResult res = run_cli("bound --verify --seed 11 --config " + cfg + " --out " + out);
  REQUIRE(res.code == 0);

  const std::string csv = slurp(out);
  REQUIRE(csv.find("# verify ok cutoff-optimality") != std::string::npos);
  REQUIRE(data_lines(csv).size() == 1 + 2 * 4);

  const std::string plot = slurp(out + ".plot");
  CHECK(count_prefixed(plot, "# delta_d vs x d=2 log_z=") == 2);
  // every block point is an "x delta" pair of finite floats
  int points = 0;
  for (const auto& line : data_lines(plot)) {
    std::stringstream ss(line);
    double x = 0.0, delta = 0.0;
    REQUIRE((ss >> x >> delta));
    REQUIRE(std::isfinite(x));
    REQUIRE(std::isfinite(delta));
    ++points;
  }
  CHECK(points == 2 * 4);
}

TEST_CASE("identical config and seed reproduce byte-identical output", "[cli]") {
  const std::string cfg = write_config(
      "[bound]\nd = 1\nx_min = 1e-7\nx_max = 1e-3\nx_points = 9\nlog_z = 0.0,3.0\n");
  const std::string out1 = temp_file("b1.csv").string();
  const std::string out2 = temp_file("b2.csv").string();
  const std::string out3 = temp_file("b3.csv").string();
  REQUIRE(run_cli("bound --seed 7 --config " + cfg + " --out " + out1).code == 0);
  REQUIRE(run_cli("bound --seed 7 --threads 2 --config " + cfg + " --out " + out2).code == 0);
  REQUIRE(run_cli("bound --seed 8 --config " + cfg + " --out " + out3).code == 0);
  const std::string a = slurp(out1), b = slurp(out2), c = slurp(out3);
  CHECK(a == b);                 // same seed, any thread count: byte-identical
  CHECK(a != c);                 // the seed is part of the recorded header
  CHECK(slurp(out1 + ".plot") == slurp(out2 + ".plot"));
  // the header is the only difference under a seed change
  const auto la = split_lines(a), lc = split_lines(c);
  REQUIRE(la.size() == lc.size());
  CHECK(la[0] != lc[0]);
  for (std::size_t i = 1; i < la.size(); ++i) CHECK(la[i] == lc[i]);
}
