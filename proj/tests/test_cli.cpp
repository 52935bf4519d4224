#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef MIDMARKET_CLI_PATH
#define MIDMARKET_CLI_PATH "midmarket"
#endif

namespace {

namespace fs = std::filesystem;

struct RunResult {
    int code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    fs::path dir = fs::path("cli_test_tmp");
    fs::create_directories(dir);
    fs::path out = dir / ("out" + std::to_string(counter) + ".txt");
    fs::path err = dir / ("err" + std::to_string(counter) + ".txt");
    ++counter;
    std::string cmd = std::string(MIDMARKET_CLI_PATH) + " " + args + " > " + out.string() +
                      " 2> " + err.string();
    int raw = std::system(cmd.c_str());
    int code = raw == -1 ? -1 : WEXITSTATUS(raw);
    return {code, slurp(out), slurp(err)};
}

fs::path write_file(const std::string& name, const std::string& body) {
    fs::path dir = fs::path("cli_test_tmp");
    fs::create_directories(dir);
    fs::path p = dir / name;
    std::ofstream(p) << body;
    return p;
}

}  // namespace

TEST_CASE("cli validate") {
    SECTION("builtin network is fine") {
        auto r = run_cli("validate builtin:network2");
        CHECK(r.code == 0);
        CHECK(r.out.find("ok") != std::string::npos);
    }
    SECTION("network file from the repository") {
        auto r = run_cli(std::string("validate ") + MIDMARKET_NETWORKS_DIR + "/network2.json");
        CHECK(r.code == 0);
    }
    SECTION("pi mass violation exits 1") {
        auto p = write_file("badpi.json", R"({
            "nodes": [{"id": "p", "class": "producer", "population": 1},
                      {"id": "c", "class": "consumer", "population": 1, "value": 1}],
            "edges": [{"from": "p", "to": "c", "cost": 0, "pi": 0.9}],
            "discount": 0.9})");
        auto r = run_cli("validate " + p.string());
        CHECK(r.code == 1);
        CHECK(r.err.find("matching distribution mass") != std::string::npos);
    }
    SECTION("missing file exits 2") {
        auto r = run_cli("validate definitely_not_here.json");
        CHECK(r.code == 2);
    }
    SECTION("unknown field exits 1") {
        auto p = write_file("unknown.json", R"({"nodes": [], "edges": [], "discount": 0.9, "bogus": 1})");
        auto r = run_cli("validate " + p.string());
        CHECK(r.code == 1);
        CHECK(r.err.find("unknown field") != std::string::npos);
    }
}

TEST_CASE("cli solve") {
    SECTION("network2 always-trade at f = 0.5") {
        auto r = run_cli("solve builtin:network2 --f 0.5 --json");
        REQUIRE(r.code == 0);
        auto j = nlohmann::json::parse(r.out);
        REQUIRE(j.is_array());
        REQUIRE(j.size() == 1);
        CHECK(j[0]["verified"] == true);
        CHECK(std::abs(j[0]["payoffs"]["mu"]["3"].get<double>() - 1.0 / 3.0) < 1e-12);
        CHECK(std::abs(j[0]["payoffs"]["mu"]["4"].get<double>() - 2.0 / 3.0) < 1e-12);
    }
    SECTION("enumeration at f = 0.2 finds the avoid-(1,4) pattern") {
        auto r = run_cli("solve builtin:network2 --f 0.2 --enumerate --json");
        REQUIRE(r.code == 0);
        auto j = nlohmann::json::parse(r.out);
        REQUIRE(j.size() == 1);
        bool found = false;
        for (const auto& ed : j[0]["pattern"])
            if (ed["from"] == "1" && ed["to"] == "4") {
                CHECK(ed["disposition"] == "never");
                found = true;
            } else {
                CHECK(ed["disposition"] == "always");
            }
        CHECK(found);
    }
    SECTION("mixed auto on the two-hop delay instance") {
        auto r = run_cli(
            "solve \"builtin:two-hop(0.6,0.2,1,0.5,0.5)\" --pattern always,mixed:1-2=auto "
            "--patient --json");
        REQUIRE(r.code == 0);
        auto j = nlohmann::json::parse(r.out);
        REQUIRE(j.size() == 1);
        CHECK(j[0]["verified"] == true);
        for (const auto& ed : j[0]["pattern"])
            if (ed["from"] == "1" && ed["to"] == "2") {
                CHECK(ed["disposition"] == "mixed");
                CHECK(std::abs(ed["lambda"].get<double>() - 0.5) < 1e-6);
            }
    }
    SECTION("unparseable pattern") {
        auto r = run_cli("solve builtin:network2 --f 0.5 --pattern sometimes");
        CHECK(r.code == 1);
    }
    SECTION("json output round-trips") {
        auto r = run_cli("solve builtin:triangle-halfcost --f 1.0 --json");
        REQUIRE(r.code == 0);
        CHECK_NOTHROW(nlohmann::json::parse(r.out));
    }
}

TEST_CASE("cli sweep reproduces the surplus split curve") {
    fs::path out = fs::path("cli_test_tmp") / "sweep.csv";
    auto r = run_cli("sweep \"builtin:surplus-triangle(2)\" --param x --grid 0.5,1.0,1.2,2.0 "
                     "--task auto --patient --out " + out.string());
    REQUIRE(r.code == 0);
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "param,equilibrium,status,u0:1,u1:1,u0:2,u1:2,u0:3,u1:3,"
          "z:1-2,lambda:1-2,z:1-3,lambda:1-3,z:3-2,lambda:3-2,mu:3");
    struct Row {
        double x, u1_1, u0_2;
        std::string status;
    };
    std::vector<Row> rows;
    for (std::string line; std::getline(in, line);) {
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
        REQUIRE(cols.size() >= 10);
        REQUIRE(cols[2] == "verified");
        rows.push_back({std::stod(cols[0]), std::stod(cols[4]), std::stod(cols[5]), cols[2]});
    }
    // one equilibrium at x = 0.5, 1.2, 2.0; two at the x = 1 boundary
    auto count = [&](double x) {
        int n = 0;
        for (const auto& row : rows) n += std::abs(row.x - x) < 1e-12;
        return n;
    };
    CHECK(count(0.5) == 1);
    CHECK(count(1.0) == 2);
    CHECK(count(1.2) == 1);
    CHECK(count(2.0) == 1);
    for (const auto& row : rows) {
        CHECK(row.status == "verified");
        if (row.x == 0.5) {
            CHECK(row.u1_1 == Catch::Approx(0.5).margin(1e-6));
            CHECK(row.u0_2 == Catch::Approx(0.5).margin(1e-6));
        }
        if (row.x == 1.2) {
            CHECK(row.u1_1 == Catch::Approx(0.0).margin(1e-6));
            CHECK(row.u0_2 == Catch::Approx(1.2).margin(1e-6));
        }
        if (row.x == 2.0) {
            CHECK(row.u1_1 == Catch::Approx(0.4).margin(1e-6));
            CHECK(row.u0_2 == Catch::Approx(1.6).margin(1e-6));
        }
    }
}

TEST_CASE("cli sweep over patience reproduces the middleman ranking") {
    fs::path out = fs::path("cli_test_tmp") / "fsweep.csv";
    auto r = run_cli("sweep builtin:network2 --param f --grid 0.5,1.0,2.0,5.0 "
                     "--task enumerate --out " + out.string());
    REQUIRE(r.code == 0);
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    // u0:3 is column 7, u0:4 column 9, u1:3 column 8, u1:4 column 10
    REQUIRE(header.find(",u0:3,u1:3,u0:4,u1:4,") != std::string::npos);
    std::size_t nrows = 0;
    for (std::string line; std::getline(in, line); ++nrows) {
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
        REQUIRE(cols[2] == "verified");
        CHECK(std::stod(cols[7]) > std::stod(cols[9]));   // u0(3) > u0(4)
        CHECK(std::stod(cols[8]) > std::stod(cols[10]));  // u1(3) > u1(4)
    }
    CHECK(nrows == 4);
}

TEST_CASE("cli sweep with the two-hop closed-form task") {
    fs::path out = fs::path("cli_test_tmp") / "thsweep.csv";
    auto r = run_cli("sweep \"builtin:two-hop(0.6,0.2,1,0.5,0.5)\" --param consumer-value:3 "
                     "--grid 0.9,1.0,1.5 --task two-hop --out " + out.string());
    REQUIRE(r.code == 0);
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    REQUIRE(header.find("lambda:1-2") != std::string::npos);
    int lam_col = 0, col = 0;
    {
        std::stringstream ss(header);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            if (tok == "lambda:1-2") lam_col = col;
            ++col;
        }
    }
    std::vector<double> lams;
    for (std::string line; std::getline(in, line);) {
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
        lams.push_back(std::stod(cols[lam_col]));
    }
    // below V-bar = 1.1 trade is delayed, above it always happens
    REQUIRE(lams.size() == 3);
    CHECK(lams[0] < 1.0);
    CHECK(lams[1] < 1.0);
    CHECK(lams[1] > lams[0]);
    CHECK(lams[2] == 1.0);
}

TEST_CASE("cli sweep of a zero-surplus market is all zeros") {
    fs::path out = fs::path("cli_test_tmp") / "zsweep.csv";
    auto r = run_cli("sweep \"builtin:two-hop(0.1,0.1,0,0.5,0.5)\" --param f "
                     "--grid 0.5,1.0 --task enumerate --out " + out.string());
    REQUIRE(r.code == 0);
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    std::size_t nrows = 0;
    for (std::string line; std::getline(in, line); ++nrows) {
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> cols;
        while (std::getline(ss, tok, ',')) cols.push_back(tok);
        REQUIRE(cols[2] == "verified");
        // every payoff, every trade probability and every mu is zero
        for (int c : {3, 4, 5, 6, 7, 8}) CHECK(std::stod(cols[c]) == 0.0);
        for (int c : {10, 12}) CHECK(std::stod(cols[c]) == 0.0);   // lambdas
        CHECK(std::stod(cols[13]) == 0.0);                         // mu
    }
    CHECK(nrows == 2);
}

TEST_CASE("cli sweep reports empty grid points") {
    // between the regimes neither pure pattern verifies: expect none-found
    auto r = run_cli("sweep builtin:network2 --param f --grid 0.4 --task enumerate");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("none-found") != std::string::npos);
}

TEST_CASE("cli simulate") {
    SECTION("f-mode networks are refused") {
        auto r = run_cli("simulate builtin:network2 --k 10 --periods 1000 --burn-in 100");
        CHECK(r.code == 1);
        CHECK(r.err.find("discount") != std::string::npos);
    }
    SECTION("small deterministic run") {
        fs::path out = fs::path("cli_test_tmp") / "sim.csv";
        std::string cmd = "simulate builtin:network2 --delta 0.9 --k 10 --periods 20000 "
                          "--burn-in 2000 --seed 5 --out " + out.string();
        auto r1 = run_cli(cmd);
        REQUIRE(r1.code == 0);
        std::string first = slurp(out);
        auto r2 = run_cli(cmd);
        REQUIRE(r2.code == 0);
        CHECK(first == slurp(out));
        CHECK(first.rfind("k,node,estimate,stderr,mu,deviation\n", 0) == 0);
    }
    SECTION("non-integer scaled population") {
        auto p = write_file("halfpop.json", R"({
            "nodes": [{"id": "1", "class": "producer", "population": 0.5},
                      {"id": "2", "class": "middleman", "population": 0.5},
                      {"id": "3", "class": "consumer", "population": 0.5, "value": 1}],
            "edges": [{"from": "1", "to": "2", "cost": 0, "pi": 0.5},
                      {"from": "2", "to": "3", "cost": 0, "pi": 0.5}],
            "discount": 0.9})");
        auto r = run_cli("simulate " + p.string() + " --k 3 --periods 1000 --burn-in 10");
        CHECK(r.code == 1);
    }
}

TEST_CASE("cli exit code 3 on solver non-convergence") {
    // above the delay threshold there is no interior mixed root
    auto r = run_cli("solve \"builtin:two-hop(0.3,0.1,2,0.5,0.5)\" "
                     "--pattern always,mixed:1-2=auto --patient");
    CHECK(r.code == 3);
    CHECK(r.out.find("no interior mixed equilibrium") != std::string::npos);
}

TEST_CASE("cli fluid trajectory export") {
    fs::path out = fs::path("cli_test_tmp") / "fluid.csv";
    auto r = run_cli("fluid builtin:network2 --horizon 40 --step 0.01 --out " + out.string());
    REQUIRE(r.code == 0);
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,3,4");
    std::string line, last;
    while (std::getline(in, line)) last = line;
    // terminal row approaches mu = (1/3, 2/3)
    std::stringstream ss(last);
    std::string tok;
    std::vector<double> cols;
    while (std::getline(ss, tok, ',')) cols.push_back(std::stod(tok));
    REQUIRE(cols.size() == 3);
    CHECK(std::abs(cols[1] - 1.0 / 3.0) < 1e-6);
    CHECK(std::abs(cols[2] - 2.0 / 3.0) < 1e-6);
}

TEST_CASE("cli simulate occupancy trace") {
    fs::path out = fs::path("cli_test_tmp") / "trace.csv";
    auto r = run_cli("simulate builtin:network2 --delta 0.9 --k 10 --periods 5000 --burn-in 500 "
                     "--trace " + out.string() + " --trace-every 50 --out " +
                     (fs::path("cli_test_tmp") / "tsim.csv").string());
    REQUIRE(r.code == 0);
    std::ifstream in(out);
    std::string header;
    std::getline(in, header);
    CHECK(header == "t,3,4");
    std::size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == 100);
}

TEST_CASE("cli builtin export loads back") {
    fs::path out = fs::path("cli_test_tmp") / "nw2.json";
    auto r = run_cli("builtin network2 --out " + out.string());
    REQUIRE(r.code == 0);
    auto r2 = run_cli("validate " + out.string());
    CHECK(r2.code == 0);
}
