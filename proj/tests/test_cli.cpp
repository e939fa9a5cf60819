#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "liexp/system.hpp"

using namespace liexp;

namespace {

struct CliRun {
  int status = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

CliRun cli(const std::string& args) {
  static int counter = 0;
  const auto stem =
      std::filesystem::temp_directory_path() / ("liexp_cli_" + std::to_string(++counter));
  const std::string out = stem.string() + ".out", err = stem.string() + ".err";
  const std::string cmd = std::string(LIEXP_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
  const int rc = std::system(cmd.c_str());
  CliRun r;
  r.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  std::remove(out.c_str());
  std::remove(err.c_str());
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::vector<double> fields_of(const std::string& line) {
  std::vector<double> vals;
  std::istringstream in(line);
  for (std::string tok; std::getline(in, tok, ',');) vals.push_back(std::stod(tok));
  return vals;
}

}  // namespace

TEST_CASE("run emits the documented CSV") {
  const CliRun r = cli(
      "run --system three-lambda-periodic --method magnus --order 2 "
      "--tmax 4 --samples 5 --epsilon 0.3");
  REQUIRE(r.status == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 6);
  CHECK(lines[0] == "t,P,P_ref,abs_err,unitarity_defect");
  for (size_t q = 1; q < lines.size(); ++q) {
    const auto v = fields_of(lines[q]);
    REQUIRE(v.size() == 5);
    CHECK(v[0] == doctest::Approx(4.0 * double(q - 1) / 4.0).epsilon(1e-15));
    CHECK(std::abs(v[3] - std::abs(v[1] - v[2])) < 1e-15);
    CHECK(v[4] < 1e-11);
  }
  // t = 0 row: nothing has happened yet
  const auto first = fields_of(lines[1]);
  CHECK(first[1] == 0.0);
  CHECK(first[3] < 1e-12);
}

TEST_CASE("run output is deterministic across invocations") {
  const std::string args =
      "run --system bloch-siegert --method fm --order 3 --tmax 6 --samples 7 --epsilon 0.5";
  const CliRun a = cli(args), b = cli(args);
  REQUIRE(a.status == 0);
  REQUIRE(b.status == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("--output writes the same bytes as stdout") {
  const auto path = std::filesystem::temp_directory_path() / "liexp_cli_file.csv";
  const std::string base =
      "run --system bloch-siegert --method ld --order 2 --tmax 2 --samples 3 --epsilon 0.4";
  const CliRun direct = cli(base);
  const CliRun filed = cli(base + " --output " + path.string());
  REQUIRE(direct.status == 0);
  REQUIRE(filed.status == 0);
  CHECK(filed.out.empty());
  CHECK(slurp(path.string()) == direct.out);
  std::remove(path.string().c_str());
}

TEST_CASE("sweep prepends the epsilon column, blocks in listed order") {
  const std::string args =
      "run --system bloch-siegert --method fm --order 2 --tmax 2 --samples 3 "
      "--sweep epsilon=0.1,0.2";
  const CliRun r = cli(args);
  REQUIRE(r.status == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == "epsilon,t,P,P_ref,abs_err,unitarity_defect");
  for (size_t q = 1; q <= 3; ++q) CHECK(fields_of(lines[q])[0] == 0.1);
  for (size_t q = 4; q <= 6; ++q) CHECK(fields_of(lines[q])[0] == 0.2);
  // the merge across worker threads must stay reproducible
  const CliRun again = cli(args);
  CHECK(again.out == r.out);
}

TEST_CASE("configuration mistakes exit with 2") {
  CHECK(cli("run --method bch").status == 2);
  CHECK(cli("run --system rabi").status == 2);
  CHECK(cli("run --observable x,y").status == 2);
  CHECK(cli("run --samples 1").status == 2);
  CHECK(cli("run --tmax -1").status == 2);
  CHECK(cli("run --order 0").status == 2);
  CHECK(cli("run --ref-tol 1e-3 --samples 2 --tmax 1").status == 2);
  CHECK(cli("run --sweep epsilon=a").status == 2);
  CHECK(cli("run --sweep eps=0.1").status == 2);
  CHECK(cli("run --mode nonsense").status == 2);
  CHECK(cli("run --no-such-flag").status == 2);
  CHECK(cli("effective --method magnus").status == 2);
  CHECK(cli("run --system missing.json").status == 2);
  CHECK(cli("run --output /no/such/dir/x.csv --samples 2 --tmax 1 --order 1").status == 2);
}

TEST_CASE("a mathematical failure exits with 3 and explains itself") {
  const CliRun r =
      cli("run --system three-lambda-qp --omega 1e-9 --method fm --order 2 --samples 3 --tmax 1");
  CHECK(r.status == 3);
  CHECK(r.err.find("error:") != std::string::npos);
  CHECK(r.err.find("k=(") != std::string::npos);
  CHECK(r.err.find("divisor=") != std::string::npos);
}

TEST_CASE("effective prints a hermitian matrix with a describing header") {
  const CliRun r =
      cli("effective --system three-lambda-periodic --order 2 --epsilon 0.5");
  REQUIRE(r.status == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "# H_ef method=floquet-magnus order=2 epsilon=0.5");
  // entries print as a+bj; H_ef = iF with F skew-Hermitian, so H12 = conj(H21)
  auto entry = [&](int i, int j) {
    std::istringstream in(lines[size_t(1 + i)]);
    std::string tok;
    for (int q = 0; q <= j; ++q) in >> tok;
    double re, im;
    REQUIRE(std::sscanf(tok.c_str(), "%lf%lfj", &re, &im) == 2);
    return Complex(re, im);
  };
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(entry(i, j) - std::conj(entry(j, i))) < 1e-12);
}

TEST_CASE("horizon prints both bounds and honours the cap") {
  const CliRun r = cli("horizon --system bloch-siegert --epsilon 0.2");
  REQUIRE(r.status == 0);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 2);
  double hm = 0.0, hf = 0.0;
  REQUIRE(std::sscanf(lines[0].c_str(), "magnus: %lf", &hm) == 1);
  REQUIRE(std::sscanf(lines[1].c_str(), "floquet-magnus: %lf", &hf) == 1);
  CHECK(hm == doctest::Approx(6.0561).epsilon(5e-4));
  CHECK(hf > 0.0);
  CHECK(hf < hm);

  const CliRun capped = cli("horizon --system bloch-siegert --epsilon 0.2 --t-cap 3");
  CHECK(lines_of(capped.out)[0] == "magnus: inf");
}

TEST_CASE("json systems load from disk, optionally as hamiltonians") {
  const auto path = std::filesystem::temp_directory_path() / "liexp_cli_sys.json";
  save_system(builtin_system("bloch-siegert"), path.string());
  const std::string tail = " --method ld --order 2 --tmax 2 --samples 3 --epsilon 0.4";
  const CliRun a = cli("run --system " + path.string() + tail);
  CHECK(a.status == 0);

  // the same file stored as H(t) = iA(t), loaded back with --hamiltonian
  SystemSpec h = builtin_system("bloch-siegert");
  h.a0 *= Complex(0.0, 1.0);
  h.terms[0] = h.terms[0].scaled(Complex(0.0, 1.0));
  h.skew_hermitian = false;  // iA is Hermitian; skip the skew check on disk
  const auto hpath = std::filesystem::temp_directory_path() / "liexp_cli_sys_h.json";
  save_system(h, hpath.string());
  const CliRun b = cli("run --system " + hpath.string() + " --hamiltonian" + tail);
  CHECK(b.status == 0);
  CHECK(b.out == a.out);

  std::remove(path.string().c_str());
  std::remove(hpath.string().c_str());
}
