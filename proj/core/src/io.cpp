#include "eigenop/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "eigenop/error.hpp"

namespace eigenop {

namespace {

static_assert(std::endian::native == std::endian::little, "portable matrices assume a little-endian host");

std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) throw IoError("sha256 failed");
    std::string out;
    char hex[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(hex, sizeof hex, "%02x", digest[i]);
        out += hex;
    }
    return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_text(path)); }

std::string base64_encode(std::string_view bytes) {
    std::string out(4 * ((bytes.size() + 2) / 3), '\0');
    const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), reinterpret_cast<const unsigned char*>(bytes.data()),
                                  static_cast<int>(bytes.size()));
    out.resize(static_cast<std::size_t>(n));
    return out;
}

std::string base64_decode(std::string_view text) {
    if (text.size() % 4 != 0) throw IoError("base64 payload length is not a multiple of 4");
    std::string out(3 * (text.size() / 4), '\0');
    const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()), reinterpret_cast<const unsigned char*>(text.data()),
                                  static_cast<int>(text.size()));
    if (n < 0) throw IoError("invalid base64 payload");
    std::size_t pad = 0;
    if (!text.empty() && text.back() == '=') ++pad;
    if (text.size() > 1 && text[text.size() - 2] == '=') ++pad;
    out.resize(static_cast<std::size_t>(n) - pad);
    return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path.string() + " for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!f) throw IoError("write failed for " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open " + path.string());
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, dump_json(j)); }

nlohmann::json read_json(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigurationError(path.string() + ": " + e.what());
    }
}

nlohmann::json to_json(const BasisDescriptor& basis) {
    std::vector<std::string> roles;
    for (auto r : basis.roles) roles.push_back(to_string(r));
    return {{"kind", basis.kind}, {"extents", basis.extents}, {"roles", roles}, {"size", basis.size}};
}

nlohmann::json complex_list(const Eigen::VectorXcd& values) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& z : values) out.push_back({z.real(), z.imag()});
    return out;
}

nlohmann::json to_json(const SpectrumReport& report) {
    nlohmann::json out;
    out["eigenvalues"] = complex_list(report.eigenvalues);
    out["residuals"] = std::vector<double>(report.residuals.data(), report.residuals.data() + report.residuals.size());
    out["max_residual"] = report.max_residual();
    out["tolerance"] = report.tolerance;
    out["sort_rule"] = report.rule == SortRule::nearest_target ? "nearest_target" : "solver_order";
    out["target"] = {report.target.real(), report.target.imag()};
    out["source"] = report.source;
    out["block_sizes"] = report.block_sizes;
    return out;
}

nlohmann::json matrix_document(const Eigen::MatrixXcd& M, const nlohmann::json& metadata) {
    std::string bytes(static_cast<std::size_t>(M.size()) * 2 * sizeof(double), '\0');
    std::size_t off = 0;
    for (Eigen::Index r = 0; r < M.rows(); ++r)
        for (Eigen::Index c = 0; c < M.cols(); ++c) {
            const double parts[2] = {M(r, c).real(), M(r, c).imag()};
            std::memcpy(bytes.data() + off, parts, sizeof parts);
            off += sizeof parts;
        }
    nlohmann::json doc;
    doc["format"] = "eigenop-matrix";
    doc["version"] = 1;
    doc["rows"] = M.rows();
    doc["cols"] = M.cols();
    doc["dtype"] = "complex128";
    doc["layout"] = "row-major";
    doc["endianness"] = "little";
    doc["metadata"] = metadata;
    doc["sha256"] = sha256_hex(bytes);
    doc["payload"] = base64_encode(bytes);
    return doc;
}

Eigen::MatrixXcd matrix_from_document(const nlohmann::json& doc) {
    if (doc.value("format", "") != "eigenop-matrix" || doc.value("version", 0) != 1) throw IoError("not an eigenop matrix document");
    const auto rows = doc.at("rows").get<Eigen::Index>();
    const auto cols = doc.at("cols").get<Eigen::Index>();
    const std::string bytes = base64_decode(doc.at("payload").get<std::string>());
    if (bytes.size() != static_cast<std::size_t>(rows * cols) * 2 * sizeof(double)) throw IoError("matrix payload has the wrong length");
    if (doc.contains("sha256") && doc.at("sha256").get<std::string>() != sha256_hex(bytes)) throw IoError("matrix payload checksum mismatch");
    Eigen::MatrixXcd M(rows, cols);
    std::size_t off = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) {
            double parts[2];
            std::memcpy(parts, bytes.data() + off, sizeof parts);
            off += sizeof parts;
            M(r, c) = {parts[0], parts[1]};
        }
    return M;
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXcd& M, const nlohmann::json& metadata) {
    write_json(path, matrix_document(M, metadata));
}

Eigen::MatrixXcd read_matrix(const std::filesystem::path& path) { return matrix_from_document(read_json(path)); }

std::string field_csv(const FieldSample& field) {
    const std::size_t dims = field.grid.dimensionality();
    std::string out;
    for (std::size_t d = 0; d < dims; ++d) out += "z" + std::to_string(d + 1) + ",";
    out += "re,im\n";
    for (std::size_t n = 0; n < field.grid.size(); ++n) {
        const auto c = field.grid.coordinates(n);
        for (double x : c) out += format17(x) + ",";
        const cplx v = field.values[static_cast<Eigen::Index>(n)];
        out += format17(v.real()) + "," + format17(v.imag()) + "\n";
    }
    return out;
}

void write_field_csv(const std::filesystem::path& path, const FieldSample& field) { write_text(path, field_csv(field)); }

HeatmapInfo write_heatmap(const std::filesystem::path& ppm_path, const std::filesystem::path& sidecar_path,
                          const FieldSample& field) {
    if (field.grid.dimensionality() != 2) throw ConfigurationError("heatmaps need a two-dimensional field");
    HeatmapInfo info;
    const auto& pts = field.grid.points();
    // z1 runs along the horizontal axis, z2 upwards
    info.width = pts[0];
    info.height = pts[1];
    for (const auto& v : field.values) info.max_abs = std::max(info.max_abs, std::abs(v.real()));
    std::string img = "P6\n" + std::to_string(info.width) + " " + std::to_string(info.height) + "\n255\n";
    const std::size_t header = img.size();
    img.resize(header + 3 * static_cast<std::size_t>(info.width * info.height));
    const double scale = info.max_abs > 0.0 ? info.max_abs : 1.0;
    for (int row = 0; row < info.height; ++row) {
        const int j2 = info.height - 1 - row;
        for (int j1 = 0; j1 < info.width; ++j1) {
            const std::size_t node = static_cast<std::size_t>(j1) * static_cast<std::size_t>(pts[1]) + static_cast<std::size_t>(j2);
            const double t = std::clamp(field.values[static_cast<Eigen::Index>(node)].real() / scale, -1.0, 1.0);
            double r, g, b;
            if (t >= 0.0) {
                r = 1.0;
                g = b = 1.0 - t;
            } else {
                b = 1.0;
                r = g = 1.0 + t;
            }
            unsigned char* px = reinterpret_cast<unsigned char*>(img.data()) + header + 3 * (static_cast<std::size_t>(row) * info.width + j1);
            px[0] = static_cast<unsigned char>(std::lround(255.0 * r));
            px[1] = static_cast<unsigned char>(std::lround(255.0 * g));
            px[2] = static_cast<unsigned char>(std::lround(255.0 * b));
        }
    }
    write_text(ppm_path, img);
    nlohmann::json side;
    side["image"] = ppm_path.filename().string();
    side["quantity"] = "real part";
    side["scale"] = "blue-white-red, symmetric about 0";
    side["max_abs"] = info.max_abs;
    side["width"] = info.width;
    side["height"] = info.height;
    side["x_axis"] = "z1";
    side["y_axis"] = "z2 (bottom to top)";
    write_json(sidecar_path, side);
    return info;
}

}  // namespace eigenop
