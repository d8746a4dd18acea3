#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "spakit/io.hpp"
#include "spakit/tightness.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kTmp = fs::temp_directory_path() / "spakit_cli_test";

struct Run {
    int code;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Run run(const std::string& args) {
    fs::create_directories(kTmp);
    const fs::path out = kTmp / "stdout.txt", err = kTmp / "stderr.txt";
    const std::string cmd = std::string(SPAKIT_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

fs::path write_file(const std::string& name, const std::string& body) {
    fs::create_directories(kTmp);
    const fs::path p = kTmp / name;
    std::ofstream(p) << body;
    return p;
}

}  // namespace

TEST_CASE("extract") {
    const fs::path i3 = write_file("i3.csv", "1,0,0\n0,1,0\n0,0,1\n");
    Run r = run("extract --input " + i3.string() + " --algo spa -r 3");
    CHECK(r.code == 0);
    CHECK(r.out == "0 1 2\n");

    r = run("extract --input " + i3.string() + " --algo spa -r 3 --tie-break highest");
    CHECK(r.code == 0);
    CHECK(r.out == "2 1 0\n");

    const fs::path diag = kTmp / "steps.csv";
    r = run("extract --input " + i3.string() + " --algo tlspa -r 3 --out " + diag.string());
    CHECK(r.code == 0);
    CHECK(slurp(diag).rfind("step,index,step_norm\n0,", 0) == 0);

    const spakit::WorstCaseInstance w = spakit::build_spa2_worstcase(1.0, 0.4, 0.01);
    const fs::path x61 = kTmp / "spa2_worst.csv";
    spakit::io::write_csv(x61, w.X.to_dense());
    r = run("extract --input " + x61.string() + " --algo spa2 -r 2");
    CHECK(r.code == 0);
    CHECK(r.out.find('2') != std::string::npos);

    const fs::path mtx = write_file("i3.mtx",
                                    "%%MatrixMarket matrix coordinate real general\n3 3 3\n1 1 1\n2 2 1\n3 3 1\n");
    r = run("extract --input " + mtx.string() + " --format mtx --algo tspa -r 3");
    CHECK(r.code == 0);
    CHECK(r.out.size() == 6);
}

TEST_CASE("extract failures") {
    const fs::path bad = write_file("bad.csv", "1,2\n3,oops\n");
    CHECK(run("extract --input " + bad.string() + " --algo spa -r 1").code == 3);
    CHECK(run("extract --input " + (kTmp / "missing.csv").string() + " --algo spa -r 1").code == 3);

    const fs::path i3 = write_file("i3.csv", "1,0,0\n0,1,0\n0,0,1\n");
    const fs::path dup = write_file("dup.csv", "1,1,0\n0,0,1\n");
    const Run rd = run("extract --input " + dup.string() + " --algo spa -r 3");
    CHECK(rd.code == 2);
    CHECK(rd.err.find("partial indices: 0 2") != std::string::npos);
    CHECK(rd.out.empty());

    CHECK(run("extract --input " + i3.string() + " --algo snpa -r 3").code == 1);
    CHECK(run("extract --input " + i3.string() + " --algo spa -r 0").code == 1);
    CHECK(run("extract --input " + i3.string() + " --algo spa -r 9").code == 1);
    CHECK(run("extract --input " + i3.string() + " --algo spa").code == 1);
}

TEST_CASE("experiment") {
    const fs::path dir = kTmp / "exp4";
    fs::remove_all(dir);
    const Run r = run("experiment --exp 4 --trials 10 --levels 21 --out " + dir.string());
    REQUIRE(r.code == 0);
    const std::string summary = slurp(dir / "exp4_summary.csv");
    CHECK(summary == r.out);
    CHECK(summary.find("4,spa,0\n") != std::string::npos);
    CHECK(summary.find("4,spa2,0\n") != std::string::npos);
    std::istringstream in(summary);
    std::string line;
    double faw = -1, tl2 = -1;
    while (std::getline(in, line)) {
        if (line.rfind("4,faw,", 0) == 0) faw = std::stod(line.substr(6));
        if (line.rfind("4,tlspa2,", 0) == 0) tl2 = std::stod(line.substr(9));
    }
    CHECK(tl2 > faw);
    CHECK(faw > 0);
    CHECK(fs::exists(dir / "exp4_sweep.csv"));
    CHECK(slurp(dir / "exp4_accuracy.svg").find("</svg>") != std::string::npos);
}

TEST_CASE("experiment smoke and determinism") {
    const fs::path a = kTmp / "smoke_a", b = kTmp / "smoke_b";
    fs::remove_all(a);
    fs::remove_all(b);
    CHECK(run("experiment --exp 1 --trials 1 --levels 2 --seed 5 --out " + a.string()).code == 0);
    CHECK(run("experiment --exp 1 --trials 1 --levels 2 --seed 5 --jobs 3 --out " + b.string()).code == 0);
    for (const char* f : {"exp1_sweep.csv", "exp1_summary.csv", "exp1_accuracy.svg"}) {
        CHECK(!slurp(a / f).empty());
        CHECK(slurp(a / f) == slurp(b / f));
    }
    CHECK(run("experiment --exp 5 --out " + a.string()).code == 1);
    CHECK(run("experiment --exp 1 --levels 1 --out " + a.string()).code == 1);
    CHECK(run("experiment --exp 1").code == 1);
}

TEST_CASE("tightness") {
    Run r = run("tightness --family spa --grid");
    CHECK(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "family,params,measured_error,analytic_bound,kappa,pass");
    int rows = 0;
    while (std::getline(in, line)) {
        ++rows;
        CHECK(line.substr(line.rfind(',') + 1) == "true");
    }
    CHECK(rows == 8);

    const fs::path out = kTmp / "mve.csv";
    r = run("tightness --family mve --out " + out.string());
    CHECK(r.code == 0);
    CHECK(slurp(out).find(",true\n") != std::string::npos);
    CHECK(run("tightness --family spa2 --grid").code == 0);
    CHECK(run("tightness --family snpa").code == 1);
}

TEST_CASE("theory-check") {
    Run r = run("theory-check --check lift-cond --samples 500");
    CHECK(r.code == 0);
    CHECK(r.out.find("PASS") != std::string::npos);
    CHECK(run("theory-check --check median-lemma --samples 1000").code == 0);
    CHECK(run("theory-check --check thm31 --samples 0").code == 1);
    CHECK(run("theory-check --check nope").code == 1);
    const Run a = run("theory-check --check thm41 --samples 20 --seed 3");
    const Run b = run("theory-check --check thm41 --samples 20 --seed 3");
    CHECK(a.out == b.out);
}

TEST_CASE("tables") {
    Run r = run("cond-table --exp 4 --trials 3");
    CHECK(r.code == 0);
    CHECK(r.out.find("4,0.01,spa,inf,inf\n") != std::string::npos);
    CHECK(r.out.find("4,0.01,spa2,inf,inf\n") != std::string::npos);
    CHECK(run("cond-table").code == 1);

    r = run("lift-sensitivity --alphas 0.1,0.5,1,2,10 --exp 3 --trials 5");
    CHECK(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    double worst_alpha = 0, worst = -1;
    while (std::getline(in, line)) {
        std::istringstream f(line);
        std::string exp, alpha, mean;
        std::getline(f, exp, ',');
        std::getline(f, alpha, ',');
        std::getline(f, mean, ',');
        if (std::stod(mean) > worst) {
            worst = std::stod(mean);
            worst_alpha = std::stod(alpha);
        }
    }
    CHECK(worst_alpha == 10.0);
    CHECK(run("lift-sensitivity --alphas 0.1").code == 1);
    CHECK(run("lift-sensitivity --exp 3 --alphas -1").code == 1);
}

TEST_CASE("help and unknown flags") {
    CHECK(run("--help").code == 0);
    for (const char* sub : {"extract", "experiment", "tightness", "theory-check", "cond-table", "lift-sensitivity"}) {
        const Run r = run(std::string(sub) + " --help");
        CHECK(r.code == 0);
        CHECK(!r.out.empty());
        CHECK(run(std::string(sub) + " --no-such-flag").code == 1);
    }
    CHECK(run("").code == 1);
    CHECK(run("frobnicate").code == 1);
}
