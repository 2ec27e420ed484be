#include <doctest.h>

#include <fstream>

#include "iidgan/adam.hpp"
#include "iidgan/checkpoint.hpp"
#include "iidgan/error.hpp"
#include "test_util.hpp"

using namespace iidgan;
using nlohmann::json;

namespace {

Mlp trained_net(Rng& rng) {
  Mlp net = mlp_new({2, 7, 3},
                    {Activation::leaky_relu(0.15), Activation::sigmoid()}, rng);
  for (auto& l : net.layers())
    for (auto& b : l.bias) b = rng.uniform() - 0.5;
  return net;
}

}  // namespace

TEST_CASE("network JSON round-trip is bit-exact") {
  Rng rng(12);
  const Mlp net = trained_net(rng);
  const Mlp back = mlp_from_json(json::parse(mlp_to_json(net).dump()));
  CHECK(back == net);
  const Matrix x = test_util::random_matrix(5, 2, rng);
  CHECK(back.predict(x) == net.predict(x));
  CHECK(back.layers()[0].activation.slope == 0.15);
}

TEST_CASE("file round-trip of network and optimizer") {
  const auto dir = test_util::temp_dir("checkpoint");
  Rng rng(3);
  Mlp net = trained_net(rng);
  AdamState st(net, AdamParams{1e-3, 0.9, 0.99, 1e-7});
  for (auto& l : net.layers())
    for (auto& g : l.weight_grad.values()) g = rng.uniform() - 0.5;
  adam_step(net, st);
  save_mlp(dir / "net.json", net);
  write_json_file(dir / "opt.json", adam_to_json(st));
  const Mlp net2 = load_mlp(dir / "net.json");
  const AdamState st2 = adam_from_json(read_json_file(dir / "opt.json"), net2);
  CHECK(net2 == net);
  CHECK(st2 == st);
}

TEST_CASE("schema violations raise CheckpointError") {
  Rng rng(1);
  const json good = mlp_to_json(trained_net(rng));
  auto mutate = [&](auto fn) {
    json j = good;
    fn(j);
    return j;
  };
  CHECK_THROWS_AS(mlp_from_json(json::array()), CheckpointError);
  CHECK_THROWS_AS(mlp_from_json(json{{"layers", json::array()}}), CheckpointError);
  CHECK_THROWS_AS(mlp_from_json(mutate([](json& j) { j["layers"][0]["rows"] = 8; })),
                  CheckpointError);
  CHECK_THROWS_AS(mlp_from_json(mutate([](json& j) { j["layers"][0]["weight"][0] = "x"; })),
                  CheckpointError);
  CHECK_THROWS_AS(mlp_from_json(mutate([](json& j) { j["layers"][1]["activation"] = "swish"; })),
                  CheckpointError);
  CHECK_THROWS_AS(mlp_from_json(mutate([](json& j) { j["layers"][1]["bias"].push_back(1.0); })),
                  CheckpointError);
  CHECK_THROWS_AS(mlp_from_json(mutate([](json& j) { j["layers"][1]["cols"] = 6; })),
                  CheckpointError);
  CHECK_THROWS_AS(mlp_from_json(mutate([](json& j) { j["layers"][0].erase("bias"); })),
                  CheckpointError);

  const Mlp net = mlp_from_json(good);
  json opt = adam_to_json(AdamState(net, AdamParams{}));
  opt["first_moment"].erase(0);
  CHECK_THROWS_AS(adam_from_json(opt, net), CheckpointError);
}

TEST_CASE("unreadable or malformed files") {
  const auto dir = test_util::temp_dir("checkpoint_bad");
  CHECK_THROWS_AS(read_json_file(dir / "missing.json"), CheckpointError);
  std::ofstream(dir / "bad.json") << "{\"layers\": [";
  CHECK_THROWS_AS(read_json_file(dir / "bad.json"), CheckpointError);
  CHECK_THROWS_AS(load_mlp(dir / "bad.json"), CheckpointError);
}
