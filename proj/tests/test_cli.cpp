#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Result {
    int status;
    std::string out;
};

Result run(const std::string& args) {
    const std::string cmd = std::string(HBTC_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[256];
    while (std::fgets(buf, sizeof buf, pipe) != nullptr) out += buf;
    const int raw = pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("hbtc_cli_" + std::to_string(getpid()))) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name, const std::string& text = {}) const {
        const fs::path p = path / name;
        if (!text.empty()) std::ofstream(p) << text;
        return p.string();
    }
};

} // namespace

TEST_CASE("gen, complete and eval") {
    TempDir dir;
    const std::string cfg = dir.file("run.cfg", "dims = 20, 20, 20\nblocks = 2, 2\nsample_ratio = 0.4\nseed = 3\n"
                                                 "max_iterations = 300\nlambda = 10\n");
    const std::string data = (dir.path / "data").string();
    const std::string result = (dir.path / "result").string();

    REQUIRE(run("gen --config " + cfg + " --out " + data).status == 0);
    for (const char* f : {"clean.ct3", "noisy.ct3", "mask.cm3", "truth.btd1"}) CHECK(fs::exists(fs::path(data) / f));

    const Result same = run("eval " + data + "/clean.ct3 " + data + "/clean.ct3");
    CHECK(same.status == 0);
    CHECK(same.out == "0.000000\n");

    REQUIRE(run("complete --config " + cfg + " --data " + data + "/noisy.ct3 --mask " + data + "/mask.cm3 --out " +
                result)
                .status == 0);
    for (const char* f : {"completed.ct3", "factors.btd1", "trace.csv"}) CHECK(fs::exists(fs::path(result) / f));
    const Result err = run("eval " + result + "/completed.ct3 " + data + "/clean.ct3");
    CHECK(err.status == 0);
    CHECK(std::stod(err.out) < 1e-3);

    std::ifstream trace(fs::path(result) / "trace.csv");
    std::string header;
    std::getline(trace, header);
    CHECK(header == "iter,f1,f2,f_lag,beta,rel_change");
}

TEST_CASE("bad input exits with status 2") {
    TempDir dir;
    const std::string bad = dir.file("bad.cfg", "lamda = 1\n");
    const Result r = run("gen --config " + bad + " --out " + (dir.path / "x").string());
    CHECK(r.status == 2);
    CHECK(r.out.find("lamda") != std::string::npos);

    const std::string junk = dir.file("junk.ct3", "not a tensor");
    CHECK(run("eval " + junk + " " + junk).status == 2);
    CHECK(run("complete --data " + junk).status == 2);
    CHECK(run("frobnicate").status != 0);
}

TEST_CASE("sweep writes labelled CSVs") {
    TempDir dir;
    const std::string cfg = dir.file("sweep.cfg", "dims = 6, 6, 6\nblocks = 1, 1\nsample_ratio = 0.5\n"
                                                   "max_iterations = 20\nswept = snr_db\nvalues = 0, 10\ntrials = 2\n"
                                                   "methods = BTD_ALS, CPD_ALS\n");
    const std::string out = (dir.path / "sweep").string();
    REQUIRE(run("sweep --config " + cfg + " --out " + out + " --threads 1").status == 0);
    std::ifstream agg(fs::path(out) / "aggregates.csv");
    std::stringstream text;
    text << agg.rdbuf();
    CHECK(text.str().rfind("method,swept_value,mean_rlne,std_rlne,trials\n", 0) == 0);
    CHECK(text.str().find("BTD_ALS") != std::string::npos);
    CHECK(text.str().find("CPD_ALS") != std::string::npos);
    CHECK(fs::exists(fs::path(out) / "rows.csv"));
}
