#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "eigenop/error.hpp"
#include "eigenop/io.hpp"

using namespace eigenop;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / "eigenop_test_io" / name;
    std::filesystem::create_directories(p.parent_path());
    return p;
}

}  // namespace

TEST(Io, Sha256KnownVectors) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Io, Base64KnownVectors) {
    EXPECT_EQ(base64_encode(""), "");
    EXPECT_EQ(base64_encode("f"), "Zg==");
    EXPECT_EQ(base64_encode("fo"), "Zm8=");
    EXPECT_EQ(base64_encode("foobar"), "Zm9vYmFy");
    for (std::string s : {"", "f", "fo", "foo", "foob", "fooba", "foobar"}) EXPECT_EQ(base64_decode(base64_encode(s)), s);
    std::string binary(257, '\0');
    for (std::size_t i = 0; i < binary.size(); ++i) binary[i] = static_cast<char>(i);
    EXPECT_EQ(base64_decode(base64_encode(binary)), binary);
}

TEST(Io, MatrixRoundTripIsBitExact) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N;
    Eigen::MatrixXcd M(5, 3);
    for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = {N(rng), N(rng)};
    M(0, 0) = {-0.0, 1e-308};
    const auto path = scratch("m.json");
    write_matrix(path, M, {{"note", "x"}});
    const auto back = read_matrix(path);
    ASSERT_EQ(back.rows(), 5);
    ASSERT_EQ(back.cols(), 3);
    for (Eigen::Index i = 0; i < M.size(); ++i) {
        EXPECT_EQ(std::memcmp(&M.data()[i], &back.data()[i], sizeof(cplx)), 0);
    }
    const auto doc = read_json(path);
    EXPECT_EQ(doc["layout"], "row-major");
    EXPECT_EQ(doc["metadata"]["note"], "x");
}

TEST(Io, MatrixLayoutIsRowMajor) {
    Eigen::MatrixXcd M(2, 2);
    M << cplx(1, 2), cplx(3, 4), cplx(5, 6), cplx(7, 8);
    const auto doc = matrix_document(M);
    const std::string bytes = base64_decode(doc["payload"].get<std::string>());
    ASSERT_EQ(bytes.size(), 64u);
    double second[2];
    std::memcpy(second, bytes.data() + 16, 16);
    EXPECT_EQ(second[0], 3.0);
    EXPECT_EQ(second[1], 4.0);
    EXPECT_EQ(doc["sha256"], sha256_hex(bytes));
}

TEST(Io, CorruptedMatrixIsRejected) {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(2, 2);
    auto doc = matrix_document(M);
    doc["sha256"] = sha256_hex("other");
    EXPECT_THROW(matrix_from_document(doc), IoError);
    doc = matrix_document(M);
    doc["rows"] = 3;
    EXPECT_THROW(matrix_from_document(doc), IoError);
    EXPECT_THROW(matrix_from_document({{"format", "npy"}}), IoError);
}

TEST(Io, FieldCsvFormat) {
    FieldSample f{Grid({2, 2}), Eigen::VectorXcd(4)};
    f.values << cplx(0.1, 0), cplx(1, -1), cplx(2, 0), cplx(3, 0.5);
    const auto csv = field_csv(f);
    const std::string expected_start = "z1,z2,re,im\n0,0,0.10000000000000001,0\n0,3.1415926535897931,1,-1\n";
    EXPECT_EQ(csv.substr(0, expected_start.size()), expected_start);
}

TEST(Io, HeatmapHeaderAndScale) {
    FieldSample f{Grid({4, 2}), Eigen::VectorXcd::Zero(8)};
    f.values[1] = 2.0;    // j1 = 0, j2 = 1: top-left pixel
    f.values[6] = -1.0;   // j1 = 3, j2 = 0: bottom-right pixel
    const auto ppm = scratch("h.ppm"), side = scratch("h.json");
    const auto info = write_heatmap(ppm, side, f);
    EXPECT_EQ(info.width, 4);
    EXPECT_EQ(info.height, 2);
    EXPECT_EQ(info.max_abs, 2.0);
    const std::string img = read_text(ppm);
    const std::string header = "P6\n4 2\n255\n";
    ASSERT_EQ(img.substr(0, header.size()), header);
    ASSERT_EQ(img.size(), header.size() + 24);
    auto px = [&](int row, int col, int c) { return static_cast<unsigned char>(img[header.size() + 3 * (row * 4 + col) + c]); };
    EXPECT_EQ(px(0, 0, 0), 255);
    EXPECT_EQ(px(0, 0, 1), 0);
    EXPECT_EQ(px(1, 3, 2), 255);
    EXPECT_EQ(px(1, 3, 0), 128);
    EXPECT_EQ(px(1, 0, 1), 255);  // zero is white
    EXPECT_EQ(read_json(side)["max_abs"], 2.0);
}

TEST(Io, JsonDumpIsStable) {
    const nlohmann::json j = {{"b", 1}, {"a", {1.5, 2}}};
    EXPECT_EQ(dump_json(j), "{\n  \"a\": [\n    1.5,\n    2\n  ],\n  \"b\": 1\n}\n");
}

TEST(Io, ParseErrorIsConfigurationError) {
    const auto p = scratch("bad.json");
    write_text(p, "{ not json");
    EXPECT_THROW(read_json(p), ConfigurationError);
    EXPECT_THROW(read_text("/nonexistent/x"), IoError);
}
