#include <doctest.h>

#include <sstream>

#include "kerrqsd/config.hpp"
#include "kerrqsd/csv.hpp"

using namespace kerrqsd;

TEST_SUITE("cli") {
  TEST_CASE("parse a flat config") {
    const RunConfig c = parse_config("# strong drive\nkappa = 1.5\ndrive = -7.0   # beta\nchi = 0.05\n\ndetuning=-5\n");
    const ModelParams p = c.params();
    CHECK(p.kappa == 1.5);
    CHECK(p.drive == -7.0);
    CHECK(p.chi == 0.05);
    CHECK(p.detuning == -5.0);
    CHECK(c.entries().size() == 4);
    CHECK(c.engine() == Engine::mqsd);
    CHECK(c.scheme() == Scheme::exponential);
  }

  TEST_CASE("flags override the file") {
    const RunConfig c = parse_config("kappa = 1.5\nseed = 7\n", {{"kappa", "2.0"}, {"engine", "fixed"}});
    CHECK(c.real("kappa") == 2.0);
    CHECK(c.seed_or("seed", 0) == 7);
    CHECK(c.engine() == Engine::fixed);
  }

  TEST_CASE("errors name the offending key") {
    auto message = [](const std::string& text) {
      try {
        const RunConfig c = parse_config(text);
        (void)c.params();
      } catch (const ConfigError& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    CHECK(message("drive = 1\nchi = 0.1\ndetuning = 0\n").find("kappa") != std::string::npos);
    CHECK(message("kappa = 1\ndrive = 1\nchi = -1\ndetuning = 0\n").find("chi") != std::string::npos);
    CHECK(message("kapa = 1\n").find("unknown config key 'kapa'") != std::string::npos);
    CHECK(message("kappa = fast\n").find("kappa") != std::string::npos);
    CHECK(message("kappa = 1\nkappa = 2\n").find("twice") != std::string::npos);
    CHECK(message("kappa 1\n").find("line 1") != std::string::npos);
    CHECK(message("dim = 12.5\n").find("dim") != std::string::npos);
    CHECK(message("engine = warp\n").find("engine") != std::string::npos);
    CHECK(message("seed = -3\n").find("seed") != std::string::npos);
    CHECK(message("detuning_lo = 1\ndetuning_hi = 0\n").find("detuning_lo") != std::string::npos);
    CHECK_THROWS_AS(parse_config("", {{"bogus", "1"}}), ConfigError);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/path.cfg"), ConfigError);
  }

  TEST_CASE("seeds cover the full 64-bit range") {
    const RunConfig c = parse_config("seed = 18446744073709551615\n");
    CHECK(c.seed_or("seed", 0) == 18446744073709551615ull);
  }

  TEST_CASE("real formatting round-trips") {
    CHECK(format_real(0.1) == "0.10000000000000001");
    CHECK(format_real(-0.0) == "0");
    CHECK(format_real(1.0) == "1");
    for (double x : {-2.5e-300, 1.0 / 3.0, -7.123456789012345e8, 6.02214076e23}) CHECK(std::stod(format_real(x)) == x);
  }

  TEST_CASE("csv layout") {
    std::ostringstream os;
    CsvWriter w(os);
    w.echo_config({{"kappa", "1.5"}, {"drive", "-7"}});
    w.comment("seed = 3");
    w.header({"t", "n", "basin"});
    w.row({0.5, 2L, std::string("lower")});
    CHECK(os.str() == "# drive = -7\n# kappa = 1.5\n# seed = 3\nt,n,basin\n0.5,2,lower\n");
    CHECK_THROWS(w.row({1.0}));
    CHECK_THROWS(w.comment("late"));
    CHECK_THROWS(w.header({"x"}));
  }
}
