#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "gamblet/config.hpp"
#include "gamblet/io.hpp"
#include "gamblet/matrix_market.hpp"

using namespace gamblet;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("gamblet_cfg_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Config, DefaultsWhenEmpty) {
  const RunConfig c = parse_config("");
  EXPECT_EQ(c.q, 4);
  EXPECT_EQ(c.coefficient, CoefficientKind::example1);
  EXPECT_EQ(c.pipeline, PipelineKind::exact);
  EXPECT_DOUBLE_EQ(c.c_rho, kDefaultCRho);
}

TEST(Config, ParsesAllSections) {
  const RunConfig c = parse_config(R"(
; comment
[problem]
q = 5
coefficient = checkerboard
contrast = 50
seed = 9
load = constant
load_value = 2.5
[solver]
pipeline = fast
w_variant = orthonormal
epsilon = 1e-3
radii = 1, 2, 3, 3, 3
jacobi = false
threads = 0
[output]
dir = results
matrix_market = true
[bases]
level = 3
indices = 1, 2
[report]
keep_fractions = 1, 0.1
)",
                                    "/base");
  EXPECT_EQ(c.q, 5);
  EXPECT_EQ(c.coefficient, CoefficientKind::checkerboard);
  EXPECT_DOUBLE_EQ(c.contrast, 50.0);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.load, LoadKind::constant);
  EXPECT_EQ(c.pipeline, PipelineKind::fast);
  EXPECT_EQ(c.variant, WVariant::orthonormal);
  EXPECT_EQ(c.radii, (std::vector<int>{1, 2, 3, 3, 3}));
  EXPECT_FALSE(c.jacobi);
  EXPECT_EQ(c.out_dir, "/base/results");
  EXPECT_TRUE(c.matrix_market);
  EXPECT_EQ(c.bases_indices, (std::vector<std::int64_t>{1, 2}));
  EXPECT_EQ(c.keep_fractions, (std::vector<double>{1.0, 0.1}));
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config("[problem]\nqq = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("[nonsense]\nq = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("q = 3\n"), ConfigError);
  EXPECT_THROW(parse_config("[problem]\nq = three\n"), ConfigError);
  EXPECT_THROW(parse_config("[problem]\nq = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("[problem]\ncoefficient = marble\n"), ConfigError);
  EXPECT_THROW(parse_config("[problem]\nq = 8\n[solver]\npipeline = exact\n"), ConfigError);
  EXPECT_THROW(parse_config("[solver]\nepsilon = 2\n"), ConfigError);
  EXPECT_THROW(parse_config("[solver]\nradii = 1, 2\n"), ConfigError);
  EXPECT_THROW(parse_config("[problem]\ncoefficient = csv\n"), ConfigError);
  EXPECT_THROW(parse_config("[report]\nkeep_fractions = 0\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST(Config, HashIgnoresOutputDirAndThreads) {
  RunConfig a = parse_config("[problem]\nq = 3\n");
  RunConfig b = a;
  b.out_dir = "elsewhere";
  b.threads = 7;
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16u);
  b.epsilon = 1e-5;
  EXPECT_NE(config_hash(a), config_hash(b));
}

TEST(Config, CanonicalTextRoundTrips) {
  const RunConfig a = parse_config("[problem]\nq = 5\ncoefficient = constant\n"
                                   "coefficient_value = 3\n[solver]\nc_rho = 0.7\n");
  const RunConfig b = parse_config(canonical_text(a));
  EXPECT_EQ(canonical_text(a), canonical_text(b));
  EXPECT_EQ(config_hash(a), config_hash(b));
}

TEST(Io, TableCsvRoundTripCarriesHash) {
  const fs::path dir = scratch("table");
  const ArtifactMeta meta{"0123456789abcdef", "test", "[problem]\nq = 3\n"};
  const Table t{"demo", {"a", "b"}, {{1.0, 2.5}, {-3.0, 1e-17}}};
  write_table_csv(dir / "t.csv", t, meta);
  const Table back = read_table_csv(dir / "t.csv");
  EXPECT_EQ(back.name, "demo");
  EXPECT_EQ(back.columns, t.columns);
  EXPECT_EQ(back.rows, t.rows);
  std::ifstream in(dir / "t.csv");
  std::string first;
  std::getline(in, first);
  EXPECT_EQ(first, "# config_hash=0123456789abcdef");
}

TEST(Io, TableRejectsRaggedRows) {
  const fs::path dir = scratch("ragged");
  const Table t{"bad", {"a", "b"}, {{1.0}}};
  EXPECT_THROW(write_table_csv(dir / "t.csv", t, {}), std::invalid_argument);
}

TEST(Io, GridCsvReadsBackAsValues) {
  const fs::path dir = scratch("grid");
  const Grid g = build_grid(2);
  Vector v(16);
  for (int i = 0; i < 16; ++i) v[i] = 0.5 * i;
  write_grid_csv(dir / "g.csv", g, v, {"h", "p", ""});
  EXPECT_EQ(read_values(dir / "g.csv"), v);
  EXPECT_THROW(write_grid_csv(dir / "x.csv", g, Vector(3), {}), std::invalid_argument);
}

TEST(Io, PgmHeaderAndSize) {
  const fs::path dir = scratch("pgm");
  const Grid g = build_grid(3);
  Vector v(64);
  for (int i = 0; i < 64; ++i) v[i] = i;
  write_pgm(dir / "f.pgm", g, v, {"h", "p", ""});
  std::ifstream in(dir / "f.pgm", std::ios::binary);
  std::string magic;
  std::getline(in, magic);
  EXPECT_EQ(magic, "P5");
  std::string line;
  while (std::getline(in, line) && line[0] == '#') {}
  EXPECT_EQ(line, "8 8");
  std::getline(in, line);
  EXPECT_EQ(line, "255");
  std::vector<unsigned char> px(64);
  in.read(reinterpret_cast<char*>(px.data()), 64);
  EXPECT_EQ(in.gcount(), 64);
  // Top-left pixel is (x = 0, y = n - 1): value 56 of 63.
  EXPECT_EQ(px[0], static_cast<unsigned char>(std::lround(255.0 * 56 / 63)));
  EXPECT_EQ(px[56], 0);
}

TEST(Io, CellPgmLogScaleNeedsPositiveValues) {
  const fs::path dir = scratch("cellpgm");
  const Grid g = build_grid(2);
  Vector cells(25, 1.0);
  EXPECT_NO_THROW(write_cell_pgm(dir / "a.pgm", g, cells, true, {}));
  cells[3] = 0.0;
  EXPECT_THROW(write_cell_pgm(dir / "b.pgm", g, cells, true, {}), std::invalid_argument);
}

TEST(Io, MatrixMarketEmbedsHash) {
  const fs::path dir = scratch("mm");
  const CsrMatrix a = CsrMatrix::identity(3);
  write_matrix_market_meta(dir / "a.mtx", a, true, {"feedfacecafebeef", "test", "x = 1\n"});
  std::ifstream in(dir / "a.mtx");
  std::string banner, comment;
  std::getline(in, banner);
  std::getline(in, comment);
  EXPECT_EQ(comment, "%config_hash=feedfacecafebeef");
  const CsrMatrix back = read_matrix_market(dir / "a.mtx");
  EXPECT_EQ(back.to_dense(), a.to_dense());
}

TEST(Io, TaggedNames) {
  EXPECT_EQ(tagged("decay_k3", ".csv", {"abc", "", ""}), "decay_k3_abc.csv");
}
