#include "kpgot/io.hpp"

#include "instances.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace kpgot;

namespace {

std::string temp_path(const std::string &name) {
    return (std::filesystem::temp_directory_path() / ("kpgot_io_" + name)).string();
}

void write_text(const std::string &path, const std::string &text) {
    std::ofstream(path) << text;
}

} // namespace

TEST(Points, ReadUniformAndWeighted) {
    const auto a = temp_path("a.csv");
    write_text(a, "x0,x1\n0,1\n2,3\n");
    const auto d = read_points_csv(a);
    EXPECT_EQ(d.count(), 2);
    EXPECT_EQ(d.dim(), 2);
    EXPECT_DOUBLE_EQ(d.weight(0), 0.5);
    const auto b = temp_path("b.csv");
    write_text(b, "x0,weight\n1.5,0.25\n-2,0.5\n");
    const auto e = read_points_csv(b);
    EXPECT_DOUBLE_EQ(e.total_mass(), 0.75);
    EXPECT_DOUBLE_EQ(e.points()(1, 0), -2.0);
}

TEST(Points, RoundTripExact) {
    std::mt19937_64 rng(71);
    const auto d = make_distribution(oracle::random_points(rng, 5, 3), oracle::random_simplex(rng, 5),
                                     MassMode::Raw);
    const auto path = temp_path("rt.csv");
    write_points_csv(path, d);
    const auto back = read_points_csv(path);
    EXPECT_EQ(back.points(), d.points());
    EXPECT_EQ(back.weights(), d.weights());
}

TEST(Points, BadFiles) {
    const auto path = temp_path("bad.csv");
    write_text(path, "a,b\n1,2\n");
    EXPECT_ANY_THROW(read_points_csv(path));
    write_text(path, "x0,x1\n1,zz\n");
    EXPECT_ANY_THROW(read_points_csv(path));
    write_text(path, "x0,x1\n1\n");
    EXPECT_ANY_THROW(read_points_csv(path));
    EXPECT_ANY_THROW(read_points_csv(temp_path("missing.csv")));
}

TEST(Keypoints, Indexing) {
    const auto path = temp_path("kp.json");
    write_text(path, R"({"indexing": 1, "pairs": [[3, 2], [6, 5]]})");
    const auto kp = read_keypoints_json(path);
    EXPECT_EQ(kp.pairs(), (std::vector<IndexPair>{{2, 1}, {5, 4}}));
    write_text(path, R"({"pairs": [[0, 1]]})");
    EXPECT_EQ(read_keypoints_json(path).pairs(), (std::vector<IndexPair>{{0, 1}}));
    write_text(path, R"({"pairs": [[0]]})");
    EXPECT_ANY_THROW(read_keypoints_json(path));
    write_text(path, "not json");
    EXPECT_ANY_THROW(read_keypoints_json(path));
}

TEST(Plans, DenseRoundTripPreservesCertificates) {
    std::mt19937_64 rng(72);
    const Vector p = oracle::random_simplex(rng, 7);
    const Vector q = oracle::random_simplex(rng, 6);
    const Matrix plan = p * q.transpose();
    const auto path = temp_path("plan.csv");
    write_plan_csv(path, plan);
    const Matrix back = read_plan_csv(path);
    EXPECT_EQ(back, plan);
    EXPECT_EQ(row_marginal_error(back, p), row_marginal_error(plan, p));
}

TEST(Plans, SparseAboveLimit) {
    const Index n = kDensePlanLimit + 1;
    Matrix plan = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        plan(i, (i * 7) % n) = 1.0 / static_cast<double>(n);
    const auto path = temp_path("sparse.csv");
    write_plan_csv(path, plan);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "i,j,value");
    EXPECT_EQ(read_plan_csv(path, n, n), plan);
}
