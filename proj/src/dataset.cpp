#include "mcae/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mcae/blob_io.hpp"

namespace mcae {

using nlohmann::json;
namespace fs = std::filesystem;

std::string kl_basis_hash(const KLBasis& basis) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  for (Eigen::Index i = 0; i < basis.eigenvalues.size(); ++i) {
    mix(basis.eigenvalues(i));
  }
  for (Eigen::Index c = 0; c < basis.modes.cols(); ++c) {
    for (Eigen::Index r = 0; r < basis.modes.rows(); ++r) {
      mix(basis.modes(r, c));
    }
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

void save_dataset(const std::string& dir, const Dataset& ds) {
  fs::create_directories(dir);
  write_matrix_file(dir + "/U_train.bin", ds.U_train);
  write_matrix_file(dir + "/Yc_train.bin", ds.Yc_train);
  write_matrix_file(dir + "/Y_train.bin", ds.Y_train);
  write_matrix_file(dir + "/U_test.bin", ds.U_test);
  write_matrix_file(dir + "/Yc_test.bin", ds.Yc_test);
  write_matrix_file(dir + "/Y_test.bin", ds.Y_test);
  write_matrix_file(dir + "/kl_eigenvalues.bin", Mat(ds.basis.eigenvalues));
  write_matrix_file(dir + "/kl_modes.bin", ds.basis.modes);

  json manifest;
  manifest["schema_version"] = 1;
  manifest["problem"] = ds.problem;
  manifest["delta"] = ds.delta;
  manifest["obs_indices"] = ds.obs_indices;
  manifest["seeds"] = {{"net", ds.seeds.net},
                       {"train", ds.seeds.train},
                       {"test", ds.seeds.test},
                       {"noise", ds.seeds.noise},
                       {"obs", ds.seeds.obs}};
  manifest["grid"] = {{"nx", ds.basis.grid.nx},
                      {"ny", ds.basis.grid.ny},
                      {"dx", ds.basis.grid.dx},
                      {"dy", ds.basis.grid.dy},
                      {"periodic", ds.basis.grid.periodic},
                      {"inner_weight", ds.basis.grid.inner_weight}};
  manifest["kl"] = {{"num_modes", ds.basis.num_modes},
                    {"hash", kl_basis_hash(ds.basis)}};
  manifest["files"] = {"U_train.bin",  "Yc_train.bin", "Y_train.bin",
                       "U_test.bin",   "Yc_test.bin",  "Y_test.bin",
                       "kl_eigenvalues.bin", "kl_modes.bin"};

  std::ofstream os(dir + "/manifest.json");
  if (!os) throw IoError("cannot write manifest in " + dir);
  os << manifest.dump(2) << "\n";
}

Dataset load_dataset(const std::string& dir) {
  std::ifstream is(dir + "/manifest.json");
  if (!is) throw IoError("cannot open manifest in " + dir);
  json manifest;
  try {
    is >> manifest;
  } catch (const json::exception& e) {
    throw IoError(std::string("manifest parse error: ") + e.what());
  }
  if (manifest.at("schema_version").get<int>() != 1) {
    throw IoError("unsupported dataset schema version");
  }

  Dataset ds;
  ds.problem = manifest.at("problem").get<std::string>();
  ds.delta = manifest.at("delta").get<double>();
  ds.obs_indices = manifest.at("obs_indices").get<std::vector<int>>();
  const json& s = manifest.at("seeds");
  ds.seeds.net = s.at("net").get<std::uint64_t>();
  ds.seeds.train = s.at("train").get<std::uint64_t>();
  ds.seeds.test = s.at("test").get<std::uint64_t>();
  ds.seeds.noise = s.at("noise").get<std::uint64_t>();
  ds.seeds.obs = s.at("obs").get<std::uint64_t>();

  ds.U_train = read_matrix_file(dir + "/U_train.bin");
  ds.Yc_train = read_matrix_file(dir + "/Yc_train.bin");
  ds.Y_train = read_matrix_file(dir + "/Y_train.bin");
  ds.U_test = read_matrix_file(dir + "/U_test.bin");
  ds.Yc_test = read_matrix_file(dir + "/Yc_test.bin");
  ds.Y_test = read_matrix_file(dir + "/Y_test.bin");

  const json& g = manifest.at("grid");
  ds.basis.grid.nx = g.at("nx").get<int>();
  ds.basis.grid.ny = g.at("ny").get<int>();
  ds.basis.grid.dx = g.at("dx").get<double>();
  ds.basis.grid.dy = g.at("dy").get<double>();
  ds.basis.grid.periodic = g.at("periodic").get<bool>();
  ds.basis.grid.inner_weight = g.at("inner_weight").get<double>();
  ds.basis.eigenvalues = read_matrix_file(dir + "/kl_eigenvalues.bin").col(0);
  ds.basis.modes = read_matrix_file(dir + "/kl_modes.bin");
  ds.basis.num_modes = static_cast<int>(ds.basis.eigenvalues.size());

  ds.kl_hash = manifest.at("kl").at("hash").get<std::string>();
  if (kl_basis_hash(ds.basis) != ds.kl_hash) {
    throw IoError("dataset KL basis hash mismatch in " + dir);
  }
  return ds;
}

}  // namespace mcae
