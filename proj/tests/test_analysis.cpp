#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "polydarcy/analysis.hpp"
#include "polydarcy/errors.hpp"
#include "polydarcy/generate.hpp"

using namespace polydarcy;

namespace {

const Rect unit_domain{{0, 0}, {1, 1}};

} // namespace

// Frozen error-decay arithmetic: the rate formula must reproduce the known
// rate columns from the known (h, err) pairs. Pure arithmetic, no solve.
TEST_CASE("rate formula reproduces the frozen decay tables") {
    const std::vector<double> h{7.942e-2, 3.801e-2, 1.920e-2, 9.692e-3};
    const std::vector<double> err_continuous{3.045e-2, 1.545e-2, 8.03e-3, 1.830e-3};
    const std::vector<double> err_discontinuous{2.266e-2, 1.217e-2, 5.916e-3, 2.913e-3};

    const auto cont = convergence_records(h, err_continuous);
    REQUIRE(cont.size() == 4);
    CHECK(!cont[0].rate.has_value());
    CHECK(*cont[1].rate == doctest::Approx(0.92).epsilon(0.005 / 0.92));
    CHECK(*cont[2].rate == doctest::Approx(0.96).epsilon(0.005 / 0.96));
    CHECK(*cont[3].rate == doctest::Approx(2.16).epsilon(0.005 / 2.16));

    const auto disc = convergence_records(h, err_discontinuous);
    CHECK(*disc[1].rate == doctest::Approx(0.84).epsilon(0.005 / 0.84));
    CHECK(*disc[2].rate == doctest::Approx(1.06).epsilon(0.005 / 1.06));
    CHECK(*disc[3].rate == doctest::Approx(1.04).epsilon(0.005 / 1.04));
}

TEST_CASE("halved error at halved mesh size gives rate one") {
    const auto rec = convergence_records({0.2, 0.1}, {0.08, 0.04});
    CHECK(*rec[1].rate == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("non-monotone mesh sizes are rejected") {
    CHECK_THROWS_AS(convergence_records({0.1, 0.2}, {0.1, 0.2}), AnalysisError);
    CHECK_THROWS_AS(convergence_records({0.1, 0.1}, {0.1, 0.1}), AnalysisError);
    CHECK_THROWS_AS(convergence_records({}, {}), AnalysisError);
}

TEST_CASE("transfer: coarse == reference is the identity") {
    const PolyMesh mesh = generate_triangulation(unit_domain, std::nullopt, 4, 0);
    Eigen::VectorXd p(mesh.n_cells());
    for (int c = 0; c < mesh.n_cells(); ++c)
        p(c) = std::sin(7.0 * c);
    const std::vector<double> t = transfer_to_reference(mesh, p, mesh);
    for (int c = 0; c < mesh.n_cells(); ++c)
        CHECK(t[c] == p(c));

    // Idempotence: a second reference-to-reference transfer changes nothing.
    Eigen::VectorXd p2 = Eigen::Map<const Eigen::VectorXd>(t.data(), t.size());
    const std::vector<double> t2 = transfer_to_reference(mesh, p2, mesh);
    for (int c = 0; c < mesh.n_cells(); ++c)
        CHECK(t2[c] == t[c]);
}

TEST_CASE("transfer: constant fields stay constant") {
    const PolyMesh coarse = generate_triangulation(unit_domain, std::nullopt, 2, 0);
    const PolyMesh fine = generate_triangulation(unit_domain, std::nullopt, 8, 0);
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(coarse.n_cells(), 3.25);
    for (double v : transfer_to_reference(coarse, p, fine))
        CHECK(v == 3.25);
}

TEST_CASE("transfer: two coarse rectangles against the 8-triangle reference") {
    // Coarse: left and right half of the unit square.
    const PolyMesh coarse = build_from_loops(
        {{0, 0}, {0.5, 0}, {1, 0}, {1, 1}, {0.5, 1}, {0, 1}},
        {{0, 1, 4, 5}, {1, 2, 3, 4}});
    Eigen::VectorXd p(2);
    p << 10.0, 20.0;

    const PolyMesh ref = generate_triangulation(unit_domain, std::nullopt, 2, 0);
    REQUIRE(ref.n_cells() == 8);
    const std::vector<double> t = transfer_to_reference(coarse, p, ref);

    // Hand enumeration: triangle centroids with x < 0.5 lie in the left
    // rectangle. Generator order: per square, lower-right then upper-left
    // triangle; squares scan x fastest.
    const std::vector<double> expected{10.0, 10.0, 20.0, 20.0, 10.0, 10.0, 20.0, 20.0};
    for (int c = 0; c < 8; ++c) {
        CHECK((ref.cells[c].centroid.x < 0.5) == (expected[c] == 10.0));
        CHECK(t[c] == expected[c]);
    }
}

TEST_CASE("relative error: zero for equal fields, offset over unit range") {
    const PolyMesh ref = generate_triangulation(unit_domain, std::nullopt, 2, 0);
    Eigen::VectorXd p_ref(ref.n_cells());
    for (int c = 0; c < ref.n_cells(); ++c)
        p_ref(c) = ref.cells[c].centroid.x < 0.5 ? 0.0 : 1.0;  // unit range

    std::vector<double> same(p_ref.data(), p_ref.data() + p_ref.size());
    CHECK(relative_l2_error(same, p_ref, ref).err == 0.0);

    std::vector<double> offset = same;
    for (double& v : offset)
        v += 0.1;
    const ErrorResult er = relative_l2_error(offset, p_ref, ref);
    CHECK(er.err == doctest::Approx(0.1).epsilon(1e-12));
    for (double e : er.cell_error)
        CHECK(e == doctest::Approx(0.1));
}

TEST_CASE("relative error: invariance and scaling") {
    const PolyMesh ref = generate_triangulation(unit_domain, std::nullopt, 4, 0);
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    Eigen::VectorXd p_ref(ref.n_cells());
    std::vector<double> p_t(ref.n_cells());
    for (int c = 0; c < ref.n_cells(); ++c) {
        p_ref(c) = d(rng);
        p_t[c] = d(rng);
    }
    const double base = relative_l2_error(p_t, p_ref, ref).err;

    // Adding the same constant to both fields changes nothing.
    Eigen::VectorXd p_ref_shift = p_ref.array() + 5.0;
    std::vector<double> p_t_shift = p_t;
    for (double& v : p_t_shift)
        v += 5.0;
    CHECK(relative_l2_error(p_t_shift, p_ref_shift, ref).err ==
          doctest::Approx(base).epsilon(1e-12));

    // Jointly scaling both fields leaves the relative error unchanged
    // (numerator and denominator both scale).
    Eigen::VectorXd p_ref_scaled = 3.0 * p_ref;
    std::vector<double> p_t_scaled = p_t;
    for (double& v : p_t_scaled)
        v *= 3.0;
    CHECK(relative_l2_error(p_t_scaled, p_ref_scaled, ref).err ==
          doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("transfer: reference cells outside the coarse mesh raise a transfer error") {
    const PolyMesh coarse = generate_triangulation(unit_domain, std::nullopt, 2, 0);
    const PolyMesh wide = generate_triangulation(Rect{{0, 0}, {2, 1}}, std::nullopt, 4, 0);
    const Eigen::VectorXd p = Eigen::VectorXd::Zero(coarse.n_cells());
    CHECK_THROWS_AS(transfer_to_reference(coarse, p, wide), AnalysisError);
}

TEST_CASE("relative error: zero reference range is rejected") {
    const PolyMesh ref = generate_triangulation(unit_domain, std::nullopt, 2, 0);
    const Eigen::VectorXd p_ref = Eigen::VectorXd::Constant(ref.n_cells(), 1.0);
    std::vector<double> p_t(ref.n_cells(), 1.0);
    CHECK_THROWS_AS(relative_l2_error(p_t, p_ref, ref), AnalysisError);
}

TEST_CASE("serial and parallel analysis paths agree bitwise") {
    const Rect domain{{0, 0}, {1, 1}};
    const Inclusion inc{{0.25, 0.5}, {0.75, 0.5}, 1.0, -1.0};
    const PolyMesh coarse =
        agglomerate(embed_inclusion(generate_triangulation(domain, inc, 8, 1), inc), 0.4, true);
    const PolyMesh fine = embed_inclusion(generate_triangulation(domain, inc, 16, 2), inc);

    Eigen::VectorXd p(coarse.n_cells());
    for (int c = 0; c < coarse.n_cells(); ++c)
        p(c) = std::cos(3.0 * c);

    const std::vector<double> ts = transfer_to_reference(coarse, p, fine, false);
    const std::vector<double> tp = transfer_to_reference(coarse, p, fine, true);
    CHECK(ts == tp);

    Eigen::VectorXd p_ref(fine.n_cells());
    for (int c = 0; c < fine.n_cells(); ++c)
        p_ref(c) = std::sin(2.0 * c);
    const ErrorResult es = relative_l2_error(ts, p_ref, fine, false);
    const ErrorResult ep = relative_l2_error(tp, p_ref, fine, true);
    CHECK(es.err == ep.err);
    CHECK(es.cell_error == ep.cell_error);
}

TEST_CASE("pairwise sum matches sequential accumulation") {
    std::mt19937 rng(37);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    std::vector<double> terms(1001);
    double seq = 0.0;
    for (double& t : terms) {
        t = d(rng);
        seq += t;
    }
    CHECK(pairwise_sum(terms) == doctest::Approx(seq).epsilon(1e-13));
    CHECK(pairwise_sum({}) == 0.0);
    CHECK(pairwise_sum({4.0}) == 4.0);
}

TEST_CASE("table and CSV formatting") {
    const auto rec = convergence_records({0.2, 0.1}, {0.08, 0.04});
    const std::string table = format_convergence_table(rec);
    CHECK(table.find("h") != std::string::npos);
    CHECK(table.find("2.0000e-01") != std::string::npos);
    CHECK(table.find("1.00") != std::string::npos);

    const std::string path = "convergence_format_test.csv";
    write_convergence_csv(rec, path);
    std::ifstream is(path);
    std::string line;
    std::getline(is, line);
    CHECK(line == "h,err,rate");
    std::getline(is, line);
    CHECK(line == "2.000000e-01,8.000000e-02,");  // no rate on the first row
    std::getline(is, line);
    CHECK(line == "1.000000e-01,4.000000e-02,1.000000");

    // Single record: err but no rate.
    const auto single = convergence_records({0.2}, {0.08});
    CHECK(single.size() == 1);
    CHECK(!single[0].rate.has_value());
}
