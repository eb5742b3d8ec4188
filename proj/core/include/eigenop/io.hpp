#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "eigenop/basis.hpp"
#include "eigenop/generator.hpp"
#include "eigenop/spectra.hpp"

namespace eigenop {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

/// Writes text exactly as given; throws IoError.
void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

/// Pretty JSON with two-space indent and a trailing newline.
std::string dump_json(const nlohmann::json& j);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

nlohmann::json to_json(const BasisDescriptor& basis);
nlohmann::json complex_list(const Eigen::VectorXcd& values);
nlohmann::json to_json(const SpectrumReport& report);

/// Portable matrix: JSON header plus base64 of row-major little-endian float64
/// pairs (re, im).
nlohmann::json matrix_document(const Eigen::MatrixXcd& M, const nlohmann::json& metadata = nlohmann::json::object());
Eigen::MatrixXcd matrix_from_document(const nlohmann::json& doc);
void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXcd& M,
                  const nlohmann::json& metadata = nlohmann::json::object());
Eigen::MatrixXcd read_matrix(const std::filesystem::path& path);

/// Header `z1,z2,re,im` (one coordinate column per fiber dimension), row-major node
/// order, 17 significant digits.
std::string field_csv(const FieldSample& field);
void write_field_csv(const std::filesystem::path& path, const FieldSample& field);

/// PPM P6 of the real part of a two-dimensional field with a blue-white-red scale
/// symmetric about 0; the sidecar records the normalization.
struct HeatmapInfo {
    double max_abs = 0.0;
    int width = 0;
    int height = 0;
};

HeatmapInfo write_heatmap(const std::filesystem::path& ppm_path, const std::filesystem::path& sidecar_path,
                          const FieldSample& field);

}  // namespace eigenop
