#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/adam.hpp"
#include "core/errors.hpp"
#include "core/graph.hpp"
#include "core/rng.hpp"
#include "core/tape.hpp"
#include "helpers.hpp"

using namespace opinn;
using testutil::max_grad_rel_error;
using testutil::random_tensor;

TEST_CASE("elementary op values") {
    Tape tape;
    Tensor zero_row(1, 4);
    NodeId sm = tape.row_softmax(tape.leaf(zero_row));
    for (double v : tape.value(sm).data) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));

    Tensor r(1, 3);
    r.data = {-1.0, 0.0, 2.0};
    NodeId relu_id = tape.relu(tape.leaf(r));
    CHECK(tape.value(relu_id).data == Tensor::Vec{0.0, 0.0, 2.0});

    auto rng = make_stream(0, "test");
    Tensor x = random_tensor(2, 3, rng);
    NodeId same = tape.mse(tape.leaf(x), tape.leaf(x));
    CHECK(tape.value(same).data[0] == 0.0);
}

TEST_CASE("row_softmax rows are stochastic") {
    auto rng = make_stream(3, "test");
    Tape tape;
    NodeId sm = tape.row_softmax(tape.leaf(random_tensor(5, 7, rng, 4.0)));
    const Tensor& v = tape.value(sm);
    for (std::size_t i = 0; i < 5; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 7; ++j) {
            double p = v(i, j);
            CHECK(p > 0.0);
            CHECK(p < 1.0);
            sum += p;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("shape mismatches name both shapes") {
    Tape tape;
    NodeId a = tape.leaf(Tensor(2, 3));
    NodeId b = tape.leaf(Tensor(3, 3));
    try {
        tape.add(a, b);
        FAIL("expected shape error");
    } catch (const InvalidParameterError& e) {
        std::string msg = e.what();
        CHECK(msg.find("2x3") != std::string::npos);
        CHECK(msg.find("3x3") != std::string::npos);
    }
}

TEST_CASE("backward requires a scalar loss and runs once") {
    Tape tape;
    NodeId a = tape.leaf(Tensor(2, 2));
    CHECK_THROWS_AS(tape.backward(a), InvalidParameterError);

    Tape tape2;
    Tensor s = Tensor::scalar(1.0);
    NodeId loss = tape2.mse(tape2.leaf(s), tape2.leaf(Tensor::scalar(0.0)));
    tape2.backward(loss);
    CHECK_THROWS_AS(tape2.backward(loss), InvalidParameterError);
}

TEST_CASE("mse at the optimum has zero gradient and unused params stay zero") {
    auto rng = make_stream(5, "test");
    Tensor x = random_tensor(3, 2, rng);
    Tape tape;
    NodeId px = tape.leaf(x);
    NodeId unused = tape.leaf(random_tensor(2, 2, rng));
    NodeId loss = tape.mse(px, tape.leaf(x));
    tape.backward(loss);
    for (double g : tape.grad(px).data) CHECK(g == 0.0);
    for (double g : tape.grad(unused).data) CHECK(g == 0.0);
}

TEST_CASE("hand-differentiated linear map") {
    // loss = mean((x W)^2) for fixed x; dloss/dW = 2/(n) x^T (x W)
    auto rng = make_stream(6, "test");
    Tensor x = random_tensor(4, 3, rng);
    Tensor w = random_tensor(3, 2, rng);

    Tape tape;
    NodeId wid = tape.leaf(w);
    NodeId y = tape.matmul(tape.leaf(x), wid);
    NodeId loss = tape.mse(y, tape.leaf(Tensor(4, 2)));
    tape.backward(loss);

    Tensor yv = tape.value(y);
    for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t b = 0; b < 2; ++b) {
            double expect = 0.0;
            for (std::size_t i = 0; i < 4; ++i) expect += x(i, a) * yv(i, b);
            expect *= 2.0 / 8.0;
            CHECK(tape.grad(wid)(a, b) == doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("finite differences confirm gradients of every op") {
    auto rng = make_stream(7, "test");
    Graph g = generate_ba_graph(5, 2, 1);
    NormalizedOperator op(g);

    std::vector<Tensor> params = {random_tensor(5, 3, rng), random_tensor(3, 3, rng),
                                  random_tensor(1, 3, rng), random_tensor(5, 1, rng),
                                  Tensor::scalar(0.4)};
    auto build = [&op](Tape& t, const std::vector<NodeId>& p) {
        NodeId z = t.matmul(p[0], p[1]);               // matmul
        z = t.add_rowvec(z, p[2]);                     // broadcast add
        z = t.tanh_(z);
        z = t.add(z, t.relu(t.spmm(&op, p[0])));       // sparse propagation
        z = t.mul(z, t.sigmoid(p[0]));                 // elementwise
        NodeId pw = t.row_softmax(t.pairwise_diff(p[3]));
        z = t.matmul(pw, z);
        z = t.sub(z, t.scale(t.transpose(t.transpose(z)), 0.5));
        z = t.add(z, t.matmul(pw, t.matmul(p[0], p[1])));
        z = t.concat_rows(t.slice_rows(z, 0, 2), t.slice_rows(z, 2, 3));
        z = t.scale_by(t.scale(z, 1.7), p[4]);
        return t.mse(z, t.leaf(Tensor(5, 3)));
    };
    CHECK(max_grad_rel_error(params, build) < 1e-4);
}

TEST_CASE("finite differences confirm a 3-layer composite") {
    auto rng = make_stream(8, "test");
    Tensor x = random_tensor(4, 3, rng);
    std::vector<Tensor> params = {random_tensor(3, 5, rng), random_tensor(1, 5, rng),
                                  random_tensor(5, 4, rng), random_tensor(1, 4, rng),
                                  random_tensor(4, 2, rng), random_tensor(1, 2, rng)};
    auto build = [&x](Tape& t, const std::vector<NodeId>& p) {
        NodeId h = t.relu(t.add_rowvec(t.matmul(t.leaf(x), p[0]), p[1]));
        h = t.tanh_(t.add_rowvec(t.matmul(h, p[2]), p[3]));
        h = t.add_rowvec(t.matmul(h, p[4]), p[5]);
        return t.mse(h, t.leaf(Tensor(4, 2)));
    };
    CHECK(max_grad_rel_error(params, build) < 1e-4);
}

TEST_CASE("finite differences confirm the recurrent encoder gradients") {
    auto rng = make_stream(9, "test");
    std::size_t d = 3;
    Tensor context = random_tensor(4, 5, rng);
    std::vector<Tensor> params = {
        random_tensor(1, d, rng), random_tensor(d, d, rng), random_tensor(1, d, rng),
        random_tensor(1, d, rng), random_tensor(d, d, rng), random_tensor(1, d, rng),
        random_tensor(1, d, rng), random_tensor(d, d, rng), random_tensor(1, d, rng)};
    auto build = [&context](Tape& t, const std::vector<NodeId>& p) {
        GruParamIds ids{p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8]};
        NodeId h = t.gru_sequence(context, ids);
        return t.mse(h, t.leaf(Tensor(4, 3)));
    };
    CHECK(max_grad_rel_error(params, build) < 1e-4);
}

TEST_CASE("optimizer hand-checked behavior") {
    // zero gradient, zero decay: parameters unchanged
    AdamState still;
    still.weight_decay = 0.0;
    Tensor p = Tensor::scalar(0.7);
    adam_step(still, {&p}, {Tensor::scalar(0.0)});
    CHECK(p.data[0] == 0.7);

    // first bias-corrected step moves by about lr
    AdamState s;
    s.learning_rate = 0.1;
    s.weight_decay = 0.0;
    Tensor q = Tensor::scalar(1.0);
    adam_step(s, {&q}, {Tensor::scalar(1.0)});
    CHECK(q.data[0] == doctest::Approx(0.9).epsilon(1e-6));

    // identical params and grads update identically
    AdamState twin;
    Tensor a = Tensor::scalar(0.5), b = Tensor::scalar(0.5);
    adam_step(twin, {&a, &b}, {Tensor::scalar(0.3), Tensor::scalar(0.3)});
    CHECK(a.data[0] == b.data[0]);
}
