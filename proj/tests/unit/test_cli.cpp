#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hicrit/cli.hpp"
#include "hicrit/errors.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace hicrit::cli;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "hicrit");
  std::ostringstream out, err;
  const int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("hicrit_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  [[nodiscard]] const fs::path& path() const { return path_; }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path_ / name) << text;
    return path_ / name;
  }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CwdGuard {
 public:
  explicit CwdGuard(const fs::path& to) : old_(fs::current_path()) { fs::current_path(to); }
  ~CwdGuard() { fs::current_path(old_); }

 private:
  fs::path old_;
};

}  // namespace

TEST(Ingest, EmptyFileRejected) {
  TempDir d;
  const auto p = d.write("empty.csv", "");
  EXPECT_THROW(ingest_matrix(p, Schema::pvalues), hicrit::ValidationError);
  EXPECT_EQ(run({"score", "--input", p.string()}).code, kExitValidation);
}

TEST(Ingest, PvalueOutOfRangeNamesLine) {
  TempDir d;
  const auto p = d.write("p.csv", "p\n0.2\n1.5\n0.3\n");
  try {
    ingest_matrix(p, Schema::pvalues);
    FAIL() << "expected a validation error";
  } catch (const hicrit::ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(":3"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'p'"), std::string::npos) << msg;
  }
}

TEST(Ingest, RejectsNanAndText) {
  TempDir d;
  EXPECT_THROW(ingest_matrix(d.write("a.csv", "x,y\n1,2\nnan,3\n"), Schema::plain), hicrit::ValidationError);
  EXPECT_THROW(ingest_matrix(d.write("b.csv", "x,y\n1,2\n4,abc\n"), Schema::plain), hicrit::ValidationError);
  EXPECT_THROW(ingest_matrix(d.write("c.csv", "x,y\n1,2\n4\n"), Schema::plain), hicrit::ValidationError);
}

TEST(Ingest, LabelsOneTwoRemapped) {
  TempDir d;
  const auto p = d.write("l.csv", "label,a,b\n1,0.1,0.2\n2,0.3,0.4\n1,0.5,0.6\n");
  const auto in = ingest_matrix(p, Schema::labeled);
  EXPECT_EQ(in.n, 3u);
  EXPECT_EQ(in.p, 2u);
  EXPECT_EQ(in.class_positive, 2u);
  EXPECT_EQ(in.class_negative, 1u);
  EXPECT_FALSE(in.warnings.empty());
  EXPECT_THROW(ingest_matrix(d.write("m.csv", "label,a\n1,0.1\n3,0.2\n"), Schema::labeled), hicrit::ValidationError);
}

TEST(Dispatch, ExitCodes) {
  EXPECT_EQ(run({}).code, kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(run({"calibrate", "--n", "100"}).code, kExitUsage);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  EXPECT_EQ(run({"phase", "--theta", "1.5"}).code, kExitValidation);

  TempDir d;
  const auto cache = d.path() / "c.csv";
  const auto miss = run({"calibrate", "--n", "100", "--alpha", "0.05", "--seed", "1", "--reps", "1000", "--cache",
                         cache.string(), "--policy", "cache_only"});
  EXPECT_EQ(miss.code, kExitCacheMiss);
}

TEST(Dispatch, ScoreOnNullGridIsZero) {
  TempDir d;
  std::string text = "p\n";
  for (int i = 1; i <= 20; ++i) text += std::to_string(i / 20.0) + "\n";
  const auto r = run({"score", "--input", d.write("g.csv", text).string(), "--variant", "plus", "--alpha0", "0.5"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("score=0 "), std::string::npos) << r.out;
}

TEST(Dispatch, PhaseGridContainsPointSix) {
  const auto r = run({"phase", "--theta", "0", "--grid", "4"});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("\n0.6,0.1,0.1,"), std::string::npos) << r.out;
}

TEST(Dispatch, PrecisionFlag) {
  const auto r = run({"phase", "--theta", "0", "--grid", "2", "--precision", "3"});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("0.333,"), std::string::npos) << r.out;
}

TEST(Dispatch, CalibrateDeterministic) {
  TempDir d;
  const auto a = d.path() / "a.csv";
  const auto b = d.path() / "b.csv";
  for (const auto& c : {a, b}) {
    const auto r = run({"calibrate", "--n", "150", "--alpha", "0.05", "--seed", "42", "--reps", "1000", "--cache", c.string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
  }
  EXPECT_EQ(slurp(a), slurp(b));
  const auto again = run({"calibrate", "--n", "150", "--alpha", "0.05", "--seed", "42", "--reps", "1000", "--cache", a.string()});
  EXPECT_NE(again.out.find("source=cache"), std::string::npos) << again.out;
}

TEST(Dispatch, ManifestWritten) {
  TempDir d;
  const auto out = d.path() / "phase.csv";
  ASSERT_EQ(run({"phase", "--grid", "5", "--out", out.string()}).code, kExitOk);
  const auto m = nlohmann::json::parse(slurp(fs::path(out.string() + ".manifest.json")));
  EXPECT_EQ(m["subcommand"], "phase");
  EXPECT_EQ(m["exit_code"], 0);
  EXPECT_EQ(m["outputs"].size(), 2u);
  EXPECT_TRUE(m.contains("duration_seconds"));
  EXPECT_TRUE(m.contains("version"));
}

TEST(GoldenReplay, EverySubcommandReplaysBitExactly) {
  const fs::path root = fs::path(HICRIT_TEST_DATA) / "golden";
  std::size_t replayed = 0;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    SCOPED_TRACE(entry.path().filename().string());
    const auto expected = nlohmann::json::parse(slurp(entry.path() / "expected.json"));
    TempDir d;
    for (const auto& in : expected["inputs"]) {
      const std::string p = in["path"];
      fs::copy_file(entry.path() / p, d.path() / p);
    }
    Result r;
    {
      CwdGuard guard(d.path());
      r = run(expected["argv"].get<std::vector<std::string>>());
    }
    ASSERT_EQ(r.code, expected["exit_code"].get<int>()) << r.err;
    const auto got = nlohmann::json::parse(slurp(d.path() / "expected.json"));
    EXPECT_EQ(got["inputs"], expected["inputs"]);
    EXPECT_EQ(got["outputs"], expected["outputs"]);
    for (const auto& o : expected["outputs"]) {
      const std::string p = o["path"];
      if (p != "-") EXPECT_EQ(slurp(d.path() / p), slurp(entry.path() / p)) << p;
    }
    ++replayed;
  }
  EXPECT_EQ(replayed, 11u);
}
