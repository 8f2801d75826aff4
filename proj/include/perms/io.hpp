#pragma once

#include <filesystem>
#include <optional>

#include "perms/design.hpp"
#include "perms/estimators.hpp"

namespace perms {

// Design file: header "t,y" for per-trial responses, or
// "level,successes,trials" for a bioassay table (expanded on load).
struct DesignInput {
  BinaryDesign design;
  std::optional<BioassayTable> bioassay;
};

DesignInput load_design_csv(const std::filesystem::path& path);
void save_design_csv(const std::filesystem::path& path, const BinaryDesign& d);

// Latent matrices. CSV: one sample per line, comma separated, optional
// non-numeric header line. Packed: 8-byte magic "PERMSLAT", uint64 S,
// uint64 n, then S*n float64, all little-endian, row-major.
inline constexpr char kLatentMagic[8] = {'P', 'E', 'R', 'M', 'S', 'L', 'A', 'T'};

RealMatrix read_latents(const std::filesystem::path& path);  // format sniffed from the magic
RealMatrix read_latents_csv(const std::filesystem::path& path);
RealMatrix read_latents_packed(const std::filesystem::path& path);
void write_latents_csv(const std::filesystem::path& path, const RealMatrix& x);
void write_latents_packed(const std::filesystem::path& path, const RealMatrix& x);

}  // namespace perms
