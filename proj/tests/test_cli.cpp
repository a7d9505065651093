#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "oya/checkpoint.hpp"
#include "oya/eval.hpp"
#include "oya/patch_store.hpp"

namespace fs = std::filesystem;
using namespace oya;

namespace {

struct Run {
    int status;
    std::string output;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(OYA_CLI_PATH) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return {-1, ""};
    std::string out;
    char buf[4096];
    while (auto n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
    const int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::map<std::string, std::string> tree_bytes(const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root))
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file_bytes(e.path());
    return out;
}

// One scratch directory per test, with a shared tiny synthetic dataset.
class Cli : public ::testing::Test {
protected:
    static fs::path root() { return fs::temp_directory_path() / ("oya_cli_" + std::to_string(::getpid())); }
    static fs::path data() { return root() / "data"; }
    static std::string synth_args(const fs::path& out) {
        return "synth --grid-spec " + (root() / "grid.txt").string() + " --out " + out.string() +
               " --train-pairs 12 --validation-pairs 4 --pretrain-pairs 4 --seed 5 --raw";
    }

    static void SetUpTestSuite() {
        fs::remove_all(root());
        fs::create_directories(root());
        KvDocument grid;
        write_grid_spec(grid, GridSpec::global().window(1000, 4400, 32, 32));
        grid.save((root() / "grid.txt").string());
        auto r = run(synth_args(data()));
        ASSERT_EQ(r.status, 0) << r.output;
    }
    static void TearDownTestSuite() { fs::remove_all(root()); }

    fs::path dir(const std::string& name) const { return root() / name; }
};

}  // namespace

TEST_F(Cli, SynthWritesStoresAndIsIdempotent) {
    auto s = read_patch_store(data() / "train");
    EXPECT_EQ(s.records.size(), 12u);
    EXPECT_EQ(s.records[0].rows(), 32);
    EXPECT_EQ(read_patch_store(data() / "validation").records.size(), 4u);
    EXPECT_TRUE(fs::exists(data() / "raw"));
    auto again = run(synth_args(dir("synth2")));
    ASSERT_EQ(again.status, 0) << again.output;
    EXPECT_EQ(tree_bytes(data()), tree_bytes(dir("synth2")));
}

TEST_F(Cli, TrainZeroStepsFromInitKeepsWeights) {
    const auto d = "--data " + (data() / "train").string();
    auto a = run("train " + d + " --steps 2 --batch-size 2 --base-width 4 --stage pretrain --out " + dir("pre").string());
    ASSERT_EQ(a.status, 0) << a.output;
    auto b = run("train " + d + " --steps 0 --init " + (dir("pre") / "checkpoint").string() + " --out " + dir("zero").string());
    ASSERT_EQ(b.status, 0) << b.output;
    auto pre = load_checkpoint(dir("pre") / "checkpoint"), zero = load_checkpoint(dir("zero") / "checkpoint");
    EXPECT_EQ(zero.stage, SourceStage::pretrained);
    for (std::size_t i = 0; i < pre.model.classifier.params().size(); ++i)
        EXPECT_EQ(pre.model.classifier.params()[i].value, zero.model.classifier.params()[i].value);
    EXPECT_EQ(tree_bytes(dir("pre") / "checkpoint"), tree_bytes(dir("zero") / "checkpoint"));
}

TEST_F(Cli, TrainIsIdempotent) {
    const auto args = "train --data " + (data() / "train").string() + " --validation " + (data() / "validation").string() +
                      " --eval-interval 2 --steps 3 --batch-size 2 --base-width 4 --seed 11 --out ";
    ASSERT_EQ(run(args + dir("t1").string()).status, 0);
    ASSERT_EQ(run(args + dir("t2").string()).status, 0);
    auto t1 = tree_bytes(dir("t1"));
    EXPECT_TRUE(t1.count("loss.csv"));
    EXPECT_TRUE(t1.count("validation.csv"));
    EXPECT_EQ(t1, tree_bytes(dir("t2")));
    // rerunning into the same directory overwrites with the same bytes
    ASSERT_EQ(run(args + dir("t1").string()).status, 0);
    EXPECT_EQ(t1, tree_bytes(dir("t1")));
}

TEST_F(Cli, EvaluateIdenticalStoresGivesPerfectScores) {
    const auto v = (data() / "validation").string();
    auto r = run("evaluate --truth " + v + " --pred " + v + " --csi-map --out " + dir("eval").string());
    ASSERT_EQ(r.status, 0) << r.output;
    std::istringstream csv(read_file_bytes(dir("eval") / "metrics.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "threshold,CSI,POD,FAR,Bias,TP,FP,FN,TN");
    int rows = 0, perfect = 0;
    while (std::getline(csv, line)) {
        ++rows;
        const auto f = line.find(',');
        const auto csi = line.substr(f + 1, line.find(',', f + 1) - f - 1);
        EXPECT_TRUE(csi == "1" || csi == "undefined") << line;
        perfect += csi == "1";
    }
    EXPECT_EQ(rows, static_cast<int>(standard_thresholds().size()));
    EXPECT_GT(perfect, 0);
    EXPECT_TRUE(fs::exists(dir("eval") / "csi_map.ppm"));
}

TEST_F(Cli, InferThenMosaic) {
    const auto d = "--data " + (data() / "train").string();
    ASSERT_EQ(run("train " + d + " --steps 1 --batch-size 2 --base-width 4 --out " + dir("m").string()).status, 0);
    auto r = run("infer --checkpoint " + (dir("m") / "checkpoint").string() + " --data " + (data() / "validation").string() +
                 " --out " + dir("pred").string());
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_EQ(read_patch_store(dir("pred")).records.size(), 4u);
    auto m = run("mosaic --input " + dir("pred").string() + "@0 --input " + dir("pred").string() + "@40 --out " + dir("mos").string());
    ASSERT_EQ(m.status, 0) << m.output;
    auto manifest = KvDocument::load((dir("mos") / "manifest.txt").string());
    EXPECT_EQ(manifest.all("satellite").size(), 2u);
    EXPECT_FALSE(manifest.all("product").empty());
}

TEST_F(Cli, BuildDatasetFromRawCollection) {
    auto r = run("build-dataset --raw " + (data() / "raw").string() + " --patch 16 --validation-years 1999 --out " + dir("built").string());
    ASSERT_EQ(r.status, 0) << r.output;
    auto train = read_patch_store(dir("built") / "train");
    EXPECT_FALSE(train.records.empty());
    for (const auto& rec : train.records) EXPECT_EQ(rec.rows(), 16);
    EXPECT_TRUE(fs::exists(dir("built") / "histogram_train.txt"));
}

TEST_F(Cli, CaseReportWritesImages) {
    ASSERT_EQ(run("train --data " + (data() / "train").string() + " --steps 1 --batch-size 2 --base-width 4 --out " + dir("c").string()).status, 0);
    auto r = run("case-report --checkpoint " + (dir("c") / "checkpoint").string() + " --raw " + (data() / "raw").string() +
                 " --scene 1 --out " + dir("case").string());
    ASSERT_EQ(r.status, 0) << r.output;
    auto files = tree_bytes(dir("case"));
    bool ppm = false;
    for (const auto& [name, bytes] : files) ppm |= name.ends_with(".ppm") && bytes.starts_with("P6");
    EXPECT_TRUE(ppm);
    EXPECT_NE(run("case-report --checkpoint " + (dir("c") / "checkpoint").string() + " --raw " + (data() / "raw").string() +
                  " --scene 999 --out " + dir("case2").string()).status, 0);
}

TEST_F(Cli, AblatePatchSizeHasThreeRows) {
    auto r = run("ablate patch_size --steps 2 --train-scenes 4 --validation-scenes 2 --pretrain-scenes 2 --base-width 4 --out " +
                 dir("ab").string());
    ASSERT_EQ(r.status, 0) << r.output;
    std::istringstream csv(read_file_bytes(dir("ab") / "ablation.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "axis,variant,light,medium,heavy,extreme");
    std::vector<std::string> variants;
    while (std::getline(csv, line)) variants.push_back(line.substr(0, line.find(',', line.find(',') + 1)));
    EXPECT_EQ(variants, (std::vector<std::string>{"patch_size,32", "patch_size,64", "patch_size,128"}));
}

TEST_F(Cli, UnknownSubcommandOrFlagPrintsUsage) {
    auto r = run("frobnicate");
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.output.find("Usage"), std::string::npos) << r.output;
    auto f = run("train --data x --out y --no-such-flag");
    EXPECT_NE(f.status, 0);
    EXPECT_NE(f.output.find("Usage"), std::string::npos) << f.output;
    EXPECT_NE(run("ablate sideways --out z").status, 0);
}

TEST_F(Cli, MissingInputNamesThePath) {
    const auto missing = (root() / "no_such_store").string();
    auto r = run("train --data " + missing + " --out " + dir("x").string());
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.output.find(missing), std::string::npos) << r.output;
    auto e = run("evaluate --truth " + (data() / "validation").string() + " --pred " + missing + " --out " + dir("x").string());
    EXPECT_NE(e.status, 0);
    EXPECT_NE(e.output.find(missing), std::string::npos) << e.output;
    auto m = run("mosaic --input " + missing + "@0 --out " + dir("x").string());
    EXPECT_NE(m.status, 0);
    EXPECT_NE(m.output.find(missing), std::string::npos) << m.output;
}
