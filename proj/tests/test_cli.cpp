#include "cscd/cli.hpp"
#include "cscd/diagnosis.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result cli(std::vector<std::string> args) {
    args.insert(args.begin(), "cscd");
    std::ostringstream out, err;
    Result r;
    r.code = cscd::cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<std::string> small_generate(const fs::path& dir, const std::string& seed = "3") {
    return {"generate", "--out", dir.string(), "--learners", "24", "--exercises", "10", "--concepts", "5",
            "--seed", seed};
}

std::vector<std::string> quick_train(const fs::path& data, const fs::path& out, const std::string& ablation = "K+R") {
    return {"train", "--data", data.string(), "--out", out.string(), "--epochs", "3", "--dim", "4", "--hidden1", "6",
            "--hidden2", "4", "--batch", "16", "--ablation", ablation, "--quiet"};
}

json read_json(const fs::path& p) { return json::parse(testing::read_text(p)); }

} // namespace

TEST_CASE("generate writes the dataset, the truth and a manifest") {
    testing::TempDir dir;
    Result r = cli(small_generate(dir.path()));
    REQUIRE(r.code == 0);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(dir.path())) {
        (void)entry;
        ++files;
    }
    CHECK(files == 7);
    for (const char* name : {"concepts.csv", "relations.csv", "qmatrix.csv", "log.csv", "truth_ks.csv", "truth_kus.csv"})
        CHECK(fs::exists(dir / name));
    json m = read_json(dir / "manifest-generate.json");
    CHECK(m["status"] == "ok");
    CHECK(m["seed"] == 3);
    CHECK(m["outputs"].size() == 6);
    CHECK(m["stats"]["learners"] == 24);
}

TEST_CASE("generate is byte-identical for a fixed seed") {
    testing::TempDir a, b, c;
    REQUIRE(cli(small_generate(a.path())).code == 0);
    REQUIRE(cli(small_generate(b.path())).code == 0);
    REQUIRE(cli(small_generate(c.path(), "4")).code == 0);
    for (const char* name : {"concepts.csv", "relations.csv", "qmatrix.csv", "log.csv", "truth_ks.csv", "truth_kus.csv"})
        CHECK(testing::read_text(a / name) == testing::read_text(b / name));
    CHECK(testing::read_text(a / "log.csv") != testing::read_text(c / "log.csv"));
}

TEST_CASE("invalid generator options fail with a validation exit code") {
    testing::TempDir dir;
    Result r = cli({"generate", "--out", dir.path().string(), "--defect-rate", "1.5"});
    CHECK(r.code == cscd::cli::kValidation);
    CHECK(r.err.find("defect") != std::string::npos);
    CHECK(read_json(dir / "manifest-generate.json")["status"] == "failed");
    CHECK_FALSE(fs::exists(dir / "log.csv"));

    CHECK(cli({"generate", "--bogus"}).code == cscd::cli::kValidation);
    CHECK(cli({}).code == cscd::cli::kValidation);
}

TEST_CASE("train writes a checkpoint and a bounded log") {
    testing::TempDir data, run;
    REQUIRE(cli(small_generate(data.path())).code == 0);
    Result r = cli(quick_train(data.path(), run.path()));
    REQUIRE(r.code == 0);
    CHECK(fs::exists(run / "checkpoint.json"));
    const std::string log = testing::read_text(run / "train_log.csv");
    const auto lines = std::count(log.begin(), log.end(), '\n');
    CHECK(lines >= 2);
    CHECK(lines <= 101);
    json m = read_json(run / "manifest-train.json");
    CHECK(m["status"] == "ok");
    CHECK(m["inputs"].size() == 4);
    CHECK(m["epochs_run"] == 3);
}

TEST_CASE("train reports a missing input file with an io exit code") {
    testing::TempDir data, run;
    REQUIRE(cli(small_generate(data.path())).code == 0);
    fs::remove(data / "qmatrix.csv");
    Result r = cli(quick_train(data.path(), run.path()));
    CHECK(r.code == cscd::cli::kIo);
    CHECK(r.err.find("qmatrix.csv") != std::string::npos);
    json m = read_json(run / "manifest-train.json");
    CHECK(m["status"] == "failed");
    CHECK(m["error"].get<std::string>().find("qmatrix.csv") != std::string::npos);
}

TEST_CASE("train rejects out-of-range hyperparameters") {
    testing::TempDir data, run;
    REQUIRE(cli(small_generate(data.path())).code == 0);
    auto args = quick_train(data.path(), run.path());
    args.push_back("--lr");
    args.push_back("0.5");
    CHECK(cli(args).code == cscd::cli::kValidation);
    args = quick_train(data.path(), run.path(), "X");
    CHECK(cli(args).code == cscd::cli::kValidation);
}

TEST_CASE("evaluate prints one reproducible metrics row") {
    testing::TempDir data, run;
    REQUIRE(cli(small_generate(data.path())).code == 0);
    REQUIRE(cli(quick_train(data.path(), run.path())).code == 0);
    const std::string ck = (run / "checkpoint.json").string();
    Result a = cli({"evaluate", "--checkpoint", ck, "--data", data.path().string(), "--name", "toy"});
    Result b = cli({"evaluate", "--checkpoint", ck, "--data", data.path().string(), "--name", "toy"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 1);
    CHECK(a.out.rfind("CSCD-K+R,toy,test,", 0) == 0);

    Result h = cli({"evaluate", "--checkpoint", ck, "--data", data.path().string(), "--split", "valid", "--header"});
    REQUIRE(h.code == 0);
    CHECK(h.out.rfind("model,dataset,split,auc,acc,rmse\n", 0) == 0);
    CHECK(h.out.find(",valid,") != std::string::npos);

    Result missing = cli({"evaluate", "--checkpoint", (run / "nope.json").string(), "--data", data.path().string()});
    CHECK(missing.code != 0);
    CHECK(cli({"evaluate", "--checkpoint", ck, "--data", data.path().string(), "--split", "all"}).code ==
          cscd::cli::kValidation);
}

TEST_CASE("K and K+R runs produce different checkpoints") {
    testing::TempDir data, full, k;
    REQUIRE(cli(small_generate(data.path())).code == 0);
    REQUIRE(cli(quick_train(data.path(), full.path(), "K+R")).code == 0);
    REQUIRE(cli(quick_train(data.path(), k.path(), "K")).code == 0);
    CHECK(testing::read_text(full / "checkpoint.json") != testing::read_text(k / "checkpoint.json"));
}

TEST_CASE("diagnose exports valid json and radar charts") {
    testing::TempDir data, run, svg;
    REQUIRE(cli(small_generate(data.path())).code == 0);
    REQUIRE(cli(quick_train(data.path(), run.path())).code == 0);
    const std::string ck = (run / "checkpoint.json").string();

    Result r = cli({"diagnose", "--checkpoint", ck, "--data", data.path().string(), "--learner", "0", "--learner", "5",
                    "--svg", svg.path().string()});
    REQUIRE(r.code == 0);
    CHECK(cscd::validate_diagnosis_json(r.out) == "");
    json doc = json::parse(r.out);
    REQUIRE(doc.size() == 2);
    CHECK(doc[0]["learner_id"] == 0);
    CHECK(doc[1]["learner_id"] == 5);
    CHECK(doc[0]["ks"].size() == 5);
    for (const char* name : {"learner_0.svg", "learner_5.svg"}) {
        const std::string text = testing::read_text(svg / name);
        CHECK(text.find("<svg ") != std::string::npos);
        CHECK(std::count(text.begin(), text.end(), '<') == std::count(text.begin(), text.end(), '>'));
        CHECK(text.find("</svg>") != std::string::npos);
    }

    Result all = cli({"diagnose", "--checkpoint", ck, "--data", data.path().string(), "--output",
                      (run / "diag.json").string(), "--truth", data.path().string(), "--out", run.path().string()});
    REQUIRE(all.code == 0);
    CHECK(all.out.empty());
    CHECK(json::parse(testing::read_text(run / "diag.json")).size() == 24);
    CHECK(all.err.find("recovery ks_auc") != std::string::npos);
    CHECK(read_json(run / "manifest-diagnose.json").contains("recovery"));

    Result bad = cli({"diagnose", "--checkpoint", ck, "--data", data.path().string(), "--learner", "99"});
    CHECK(bad.code == cscd::cli::kValidation);
    CHECK(bad.err.find("0..23") != std::string::npos);
}

TEST_CASE("diagnose refuses a baseline checkpoint") {
    testing::TempDir data, run;
    REQUIRE(cli(small_generate(data.path())).code == 0);
    auto args = quick_train(data.path(), run.path());
    args.push_back("--model");
    args.push_back("irt");
    REQUIRE(cli(args).code == 0);
    Result r = cli({"diagnose", "--checkpoint", (run / "checkpoint.json").string(), "--data", data.path().string()});
    CHECK(r.code == cscd::cli::kValidation);
    Result e = cli({"evaluate", "--checkpoint", (run / "checkpoint.json").string(), "--data", data.path().string()});
    CHECK(e.out.rfind("IRT,", 0) == 0);
}

TEST_CASE("ablate prints one row per variant") {
    testing::TempDir data, run;
    REQUIRE(cli(small_generate(data.path())).code == 0);
    Result r = cli({"ablate", "--data", data.path().string(), "--out", run.path().string(), "--epochs", "2", "--dim",
                    "4", "--hidden1", "6", "--hidden2", "4", "--quiet", "--name", "toy"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("\nCSCD-K,toy,test,") != std::string::npos);
    CHECK(r.out.find("\nCSCD-R,toy,test,") != std::string::npos);
    CHECK(r.out.find("\nCSCD-K+R,toy,test,") != std::string::npos);
    CHECK(testing::read_text(run / "ablation.csv") == r.out);
}

TEST_CASE("the output directory defaults to the environment variable") {
    testing::TempDir dir;
    ::setenv(cscd::cli::kOutputDirEnv, dir.path().string().c_str(), 1);
    Result r = cli({"generate", "--learners", "5", "--exercises", "6", "--concepts", "3"});
    ::unsetenv(cscd::cli::kOutputDirEnv);
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "log.csv"));
    CHECK(fs::exists(dir / "manifest-generate.json"));
}

TEST_CASE("the installed binary returns the documented exit codes") {
    testing::TempDir dir;
    const std::string bin = CSCD_CLI_PATH;
    const std::string quiet = " >/dev/null 2>&1";
    int ok = std::system((bin + " generate --learners 5 --exercises 6 --concepts 3 --out " + dir.path().string() + quiet).c_str());
    CHECK(WEXITSTATUS(ok) == 0);
    int bad = std::system((bin + " generate --defect-rate 1.5 --out " + dir.path().string() + quiet).c_str());
    CHECK(WEXITSTATUS(bad) == 1);
    int io = std::system((bin + " train --data " + (dir / "missing").string() + " --out " + dir.path().string() + quiet).c_str());
    CHECK(WEXITSTATUS(io) == 2);
    int help = std::system((bin + " --help" + quiet).c_str());
    CHECK(WEXITSTATUS(help) == 0);
}
