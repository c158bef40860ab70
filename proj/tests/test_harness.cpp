#include "garma/harness.hpp"
#include "garma/random.hpp"

#include <doctest.h>

#include <filesystem>
#include <sstream>

using namespace garma;

namespace {

io::KeyValueFile parse_kv(const std::string& text) {
    std::istringstream in(text);
    return io::KeyValueFile::parse(in);
}

Scenario small_scenario() {
    return parse_scenario(parse_kv("name = tiny\nfamily = binomial\nm = 15\nn = 120\nalpha = -0.5\nphi = -0.4\n"
                                   "p_max = 2\nq_max = 1\niters = 300\nsigma_grid = 0.5, 5\n"
                                   "burn_grid = 0, 100\nthin_grid = 1, 3\nreplications = 4\nseed = 11\n"));
}

std::string csv_of(const ScenarioReport& r) {
    std::ostringstream out;
    write_report_csv(out, r);
    return out.str();
}

}  // namespace

TEST_CASE("seed derivation") {
    CHECK(replication_seed(7, 3) == derive_seed(7, 3));
    CHECK(derive_seed(7, 3) == splitmix64(7 ^ 3));
    CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
}

TEST_CASE("scenario parsing") {
    const Scenario s = small_scenario();
    CHECK(s.name == "tiny");
    CHECK(s.family.kind == FamilyKind::Binomial);
    CHECK(s.family.m == 15);
    CHECK(s.truth.shape() == ModelShape{0, 2, 1});
    CHECK(s.truth.phi(0) == -0.4);
    CHECK_FALSE(s.truth.included(2));
    CHECK(s.sigma_grid == std::vector<double>{0.5, 5.0});
    CHECK(s.burn_grid == std::vector<std::size_t>{0, 100});
    CHECK(s.thin_grid == std::vector<std::size_t>{1, 3});

    std::ostringstream out;
    scenario_to_keyvalue(s).write(out);
    const Scenario again = parse_scenario(parse_kv(out.str()));
    CHECK(again.truth == s.truth);
    CHECK(again.sigma_grid == s.sigma_grid);
    CHECK(again.replications == s.replications);

    CHECK_THROWS_AS((void)parse_scenario(parse_kv("bogus = 1\nm = 15\n")), io::FormatError);
    CHECK_THROWS_AS((void)parse_scenario(parse_kv("family = poisson\nm = 15\n")), io::FormatError);
    CHECK_THROWS_AS((void)parse_scenario(parse_kv("family = binomial\n")), io::FormatError);
    CHECK_THROWS((void)parse_scenario(parse_kv("m = 15\niters = 100\nburn_grid = 100\n")));
    CHECK_THROWS((void)parse_scenario(parse_kv("m = 15\nreplications = 0\n")));
    CHECK_THROWS((void)parse_scenario(parse_kv("m = 15\nsigma_grid =\n")));
    CHECK_THROWS((void)parse_scenario(parse_kv("m = 15\np_max = 1\nphi = 0.1, 0.2\n")));
}

TEST_CASE("report shape") {
    Scenario s = small_scenario();
    s.replications = 1;
    s.sampler.iters = 10;
    s.burn_grid = {0};
    s.thin_grid = {1, 2};
    const auto report = run_scenario(s, 1);
    CHECK(report.requested == 1);
    CHECK(report.failed == 0);
    REQUIRE(report.cells.size() == 2 * 1 * 2);
    CHECK(report.cells[0].key == CellKey{0.5, 0, 1});
    CHECK(report.cells[1].key == CellKey{0.5, 0, 2});
    CHECK(report.cells[2].key == CellKey{5.0, 0, 1});
    for (const auto& cell : report.cells) {
        CHECK(cell.replications == 1);
        CHECK(cell.coefficients.size() == 4);
        CHECK(cell.pct_correct_hpd >= 0.0);
        CHECK(cell.pct_correct_hpd <= 100.0);
    }
    CHECK(report.cells[0].coefficients[1].name == "phi1");
    CHECK(report.cells[0].coefficients[1].truth == -0.4);
}

TEST_CASE("reports do not depend on parallelism") {
    const Scenario s = small_scenario();
    const auto a = run_scenario(s, 1);
    const auto b = run_scenario(s, 3);
    CHECK(csv_of(a) == csv_of(b));
    std::ostringstream ta;
    std::ostringstream tb;
    write_report_table(ta, a);
    write_report_table(tb, b);
    CHECK(ta.str() == tb.str());
    CHECK(csv_of(run_scenario(s, 2)) == csv_of(a));
}

TEST_CASE("failed replications are excluded and counted") {
    Scenario s = small_scenario();
    s.truth.with_alpha(1000.0);
    s.family = Family::poisson();
    s.replications = 2;
    const auto report = run_scenario(s, 2);
    CHECK(report.failed == 2);
    CHECK(report.failures.size() == 2);
    for (const auto& cell : report.cells) CHECK(cell.replications == 0);
}

TEST_CASE("report CSV round trip and comparison") {
    Scenario s = small_scenario();
    s.replications = 2;
    const auto report = run_scenario(s, 1);
    std::istringstream in(csv_of(report));
    const auto back = read_report_csv(in);
    CHECK(csv_of(back) == csv_of(report));

    const auto zero = compare_reports(report, report);
    for (const auto& cell : zero.cells) {
        CHECK(cell.pct_correct_hpd == 0.0);
        for (const auto& c : cell.coefficients) {
            CHECK(c.mean == 0.0);
            CHECK(c.hpd_lo == 0.0);
        }
    }

    ScenarioReport a;
    a.cells.push_back(CellReport{CellKey{5.0, 0, 1}, 10, 90.0, 70.0, {}});
    ScenarioReport b = a;
    b.cells[0].pct_correct_hpd = 80.0;
    CHECK(compare_reports(a, b).cells[0].pct_correct_hpd == doctest::Approx(10.0));

    ScenarioReport other = a;
    other.cells[0].key.burn = 1000;
    CHECK_THROWS_AS((void)compare_reports(a, other), std::invalid_argument);
    other = a;
    other.cells.push_back(a.cells[0]);
    CHECK_THROWS_AS((void)compare_reports(a, other), std::invalid_argument);
}

TEST_CASE("bundled scenarios parse") {
#ifdef GARMA_SCENARIO_DIR
    std::size_t count = 0;
    for (const auto& entry : std::filesystem::directory_iterator(GARMA_SCENARIO_DIR)) {
        if (entry.path().extension() != ".scenario") continue;
        CAPTURE(entry.path().string());
        const Scenario s = load_scenario(entry.path());
        CHECK(s.family.kind == FamilyKind::Binomial);
        CHECK(s.sampler.iters == 30000);
        CHECK(s.replications == 100);
        ++count;
    }
    CHECK(count == 5);
#endif
}
