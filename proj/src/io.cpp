#include "perms/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "csv.hpp"

namespace perms {

namespace {

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out |= ((v >> (8 * i)) & 0xffU) << (8 * (7 - i));
  return out;
}

void put_u64(std::ostream& os, std::uint64_t v) {
  v = to_le(v);
  os.write(reinterpret_cast<const char*>(&v), 8);
}

bool get_u64(std::istream& is, std::uint64_t& v) {
  if (!is.read(reinterpret_cast<char*>(&v), 8)) return false;
  v = to_le(v);
  return true;
}

bool all_numeric(const std::vector<std::string>& cells) {
  for (const auto& c : cells) {
    try {
      std::size_t used = 0;
      (void)std::stod(c, &used);
      if (used != c.size()) return false;
    } catch (const std::exception&) {
      return false;
    }
  }
  return true;
}

}  // namespace

DesignInput load_design_csv(const std::filesystem::path& path) {
  const auto tab = csv::read(path);
  const std::string name = path.filename().string();
  DesignInput out;
  if (tab.column("level") >= 0) {
    const int cl = tab.column("level"), cs = tab.column("successes"), ct = tab.column("trials");
    if (cs < 0 || ct < 0) throw InvalidInput(name + ": need columns level,successes,trials");
    BioassayTable tb;
    for (std::size_t i = 0; i < tab.rows.size(); ++i) {
      const std::string where = name + " row " + std::to_string(i + 2);
      tb.level.push_back(csv::to_double(tab.rows[i][cl], where));
      tb.successes.push_back(csv::to_int(tab.rows[i][cs], where));
      tb.trials.push_back(csv::to_int(tab.rows[i][ct], where));
    }
    tb.validate();
    out.design = expand_bioassay(tb);
    out.bioassay = std::move(tb);
    return out;
  }
  const int c_t = tab.column("t"), c_y = tab.column("y");
  if (c_t < 0 || c_y < 0) throw InvalidInput(name + ": need columns t,y or level,successes,trials");
  for (std::size_t i = 0; i < tab.rows.size(); ++i) {
    const std::string where = name + " row " + std::to_string(i + 2);
    out.design.t.push_back(csv::to_double(tab.rows[i][c_t], where));
    out.design.y.push_back(csv::to_int(tab.rows[i][c_y], where));
  }
  out.design.validate();
  return out;
}

void save_design_csv(const std::filesystem::path& path, const BinaryDesign& d) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "t,y\n" << std::setprecision(17);
  for (std::size_t i = 0; i < d.size(); ++i) os << d.t[i] << ',' << d.y[i] << '\n';
}

RealMatrix read_latents(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  char head[8] = {};
  in.read(head, 8);
  if (in.gcount() == 8 && std::memcmp(head, kLatentMagic, 8) == 0) return read_latents_packed(path);
  return read_latents_csv(path);
}

RealMatrix read_latents_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string name = path.filename().string();
  RealMatrix x;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (csv::trim(line).empty()) continue;
    const auto cells = csv::split(line);
    if (x.rows == 0 && x.cols == 0 && lineno == 1 && !all_numeric(cells)) continue;  // header
    if (x.cols == 0) x.cols = cells.size();
    if (cells.size() != x.cols) throw InvalidInput(name + ": line " + std::to_string(lineno) + " has the wrong number of fields");
    for (const auto& c : cells) x.data.push_back(csv::to_double(c, name + " line " + std::to_string(lineno)));
    ++x.rows;
  }
  if (x.rows == 0) throw InvalidInput(name + ": no latent rows");
  return x;
}

RealMatrix read_latents_packed(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string name = path.filename().string();
  char head[8] = {};
  in.read(head, 8);
  if (in.gcount() != 8 || std::memcmp(head, kLatentMagic, 8) != 0) throw InvalidInput(name + ": bad magic");
  std::uint64_t S = 0, n = 0;
  if (!get_u64(in, S) || !get_u64(in, n)) throw InvalidInput(name + ": truncated header");
  if (S == 0 || n == 0 || S > std::numeric_limits<std::uint64_t>::max() / 8 / n)
    throw InvalidInput(name + ": bad dimensions");
  RealMatrix x(S, n);
  for (double& v : x.data) {
    std::uint64_t bits = 0;
    if (!get_u64(in, bits)) throw InvalidInput(name + ": truncated data");
    v = std::bit_cast<double>(bits);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw InvalidInput(name + ": trailing bytes");
  return x;
}

void write_latents_csv(const std::filesystem::path& path, const RealMatrix& x) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << std::setprecision(17);
  for (std::size_t i = 0; i < x.rows; ++i) {
    for (std::size_t j = 0; j < x.cols; ++j) os << (j ? "," : "") << x(i, j);
    os << '\n';
  }
}

void write_latents_packed(const std::filesystem::path& path, const RealMatrix& x) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os.write(kLatentMagic, 8);
  put_u64(os, x.rows);
  put_u64(os, x.cols);
  for (double v : x.data) put_u64(os, std::bit_cast<std::uint64_t>(v));
}

}  // namespace perms
