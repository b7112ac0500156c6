#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "zv/checkpoint.hpp"
#include "zv/rng.hpp"

#include "support/testutil.hpp"

using namespace zv;

TEST_CASE("checkpoint round-trip is bit-exact and save/load/save is byte-identical") {
    tu::TempDir dir("ckpt");
    Rng rng(5);
    Param a = tu::random_param("alpha.w", {3, 4}, rng);
    Param b = tu::random_param("beta.b", {7}, rng);
    Param c = tu::random_param("lora.vision.a", {2, 4}, rng);
    std::vector<Param*> params = {&a, &b, &c};

    auto p1 = dir.path / "m1.zvc";
    save_checkpoint(p1, params);

    Param a2("alpha.w", {3, 4}, std::vector<float>(12, 0.0f));
    Param b2("beta.b", {7}, std::vector<float>(7, 0.0f));
    Param c2("lora.vision.a", {2, 4}, std::vector<float>(8, 0.0f));
    std::vector<Param*> params2 = {&a2, &b2, &c2};
    load_checkpoint(p1, params2);
    CHECK(tu::bits_equal(a.values(), a2.values()));
    CHECK(tu::bits_equal(b.values(), b2.values()));
    CHECK(tu::bits_equal(c.values(), c2.values()));

    auto p2 = dir.path / "m2.zvc";
    save_checkpoint(p2, params2);
    CHECK(tu::read_file(p1) == tu::read_file(p2));
}

TEST_CASE("manifest lists name, shape and offset") {
    tu::TempDir dir("ckpt_manifest");
    Rng rng(6);
    Param a = tu::random_param("one", {2, 2}, rng);
    Param b = tu::random_param("two", {3}, rng);
    auto p = dir.path / "m.zvc";
    save_checkpoint(p, {&a, &b});

    auto manifest = read_manifest(p);
    REQUIRE(manifest.size() == 2);
    CHECK(manifest[0].name == "one");
    CHECK(manifest[0].shape == std::vector<int>{2, 2});
    CHECK(manifest[0].offset == 0);
    CHECK(manifest[1].name == "two");
    CHECK(manifest[1].offset == 16);
}

TEST_CASE("missing parameters are fatal except fresh lora adapters") {
    tu::TempDir dir("ckpt_missing");
    Rng rng(7);
    Param a = tu::random_param("core.w", {2}, rng);
    auto p = dir.path / "m.zvc";
    save_checkpoint(p, {&a});

    Param a2("core.w", {2}, {0, 0});
    Param fresh("lora.decoder.layer0.q.a", {2, 2}, {0, 0, 0, 0});
    load_checkpoint(p, {&a2, &fresh});  // lora may be absent
    CHECK(tu::bits_equal(a.values(), a2.values()));

    Param other("other.w", {2}, {0, 0});
    CHECK(tu::throws_with([&] { load_checkpoint(p, {&other}); }, "missing parameter other.w"));

    Param wrong("core.w", {3}, {0, 0, 0});
    CHECK(tu::throws_with([&] { load_checkpoint(p, {&wrong}); }, "shape"));
}

TEST_CASE("bad magic is rejected") {
    tu::TempDir dir("ckpt_magic");
    auto p = dir.path / "junk.zvc";
    {
        std::ofstream out(p, std::ios::binary);
        out << "NOTMAGIC and some trailing bytes";
    }
    CHECK(tu::throws_with([&] { read_manifest(p); }, "bad magic"));
}
