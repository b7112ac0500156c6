#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "zv/lora.hpp"
#include "zv/tokens.hpp"
#include "zv/trainable.hpp"

#include "support/linalg.hpp"
#include "support/testutil.hpp"

using namespace zv;

namespace {
LoraSettings tiny_lora() {
    LoraSettings l;
    l.rank = 2;
    l.alpha = 4.0f;
    return l;
}

QFormerConfig tiny_config() {
    QFormerConfig c;
    c.num_queries = 2;
    c.hidden_dim = 8;
    c.num_layers = 2;
    c.num_heads = 2;
    c.vocab_size = 12;
    c.max_text_len = 6;
    c.image_patches = 3;
    c.image_feat_dim = 5;
    c.decoder_dim = 8;
    c.decoder_layers = 1;
    c.decoder_heads = 2;
    c.ffn_mult = 2;
    return c;
}
}  // namespace

TEST_CASE("zero-init adapter is a bit-exact identity delta") {
    Rng rng(1);
    Linear base = Linear::make("base", 6, 4, rng);
    LoRAAdapter ad = LoRAAdapter::make("lora.t", 6, 4, 3, 8.0f, rng);
    for (float v : ad.b.values()) CHECK(v == 0.0f);

    Tensor x({5, 6}, tu::random_values(30, rng, 1.0));
    Tape t1, t2;
    Tensor plain = base.apply(t1, x);
    Tensor adapted = lora_forward(t2, base, ad, x);
    CHECK(tu::bits_equal(plain.values(), adapted.values()));
}

TEST_CASE("rank-1 hand case") {
    // A = [[1, 0]], B = [[1], [0]], alpha = 1, x = [2, 5]
    Rng rng(2);
    Linear base = Linear::make("base", 2, 2, rng);
    LoRAAdapter ad;
    ad.rank = 1;
    ad.alpha = 1.0f;
    ad.a = Param("lora.t.a", {1, 2}, {1.0f, 0.0f});
    ad.b = Param("lora.t.b", {2, 1}, {1.0f, 0.0f});

    Tensor x({1, 2}, {2.0f, 5.0f});
    Tape t1, t2;
    Tensor plain = base.apply(t1, x);
    Tensor adapted = lora_forward(t2, base, ad, x);
    CHECK(adapted.at(0, 0) == plain.at(0, 0) + 2.0f);
    CHECK(adapted.at(0, 1) == plain.at(0, 1));
}

TEST_CASE("gradient flows to A and B but not to the frozen base") {
    Rng rng(3);
    Linear base = Linear::make("base", 4, 3, rng);
    base.w.set_requires_grad(false);
    base.bias.set_requires_grad(false);
    LoRAAdapter ad = LoRAAdapter::make("lora.t", 4, 3, 2, 4.0f, rng);

    Tensor x({2, 4}, tu::random_values(8, rng, 1.0));
    Tape t;
    t.backward(sum_all(lora_forward(t, base, ad, x)));
    CHECK(base.w.grad().empty());
    CHECK(base.bias.grad().empty());
    CHECK(!ad.a.grad().empty());
    // B is zero so dA = 0; B still receives gradient through A x.
    bool b_nonzero = false;
    for (float g : ad.b.grad()) b_nonzero = b_nonzero || g != 0.0f;
    CHECK(b_nonzero);
}

TEST_CASE("merge equals the adapted forward and stays low-rank") {
    Rng rng(4);
    Linear base = Linear::make("base", 7, 5, rng);
    LoRAAdapter ad = LoRAAdapter::make("lora.t", 7, 5, 2, 8.0f, rng);
    for (auto& v : ad.b.values()) v = rng.gaussianf(0.5);  // trained-looking adapter

    Linear merged = merge(base, ad);
    CHECK(!merged.lora.has_value());
    for (int trial = 0; trial < 100; ++trial) {
        Tensor x({1, 7}, tu::random_values(7, rng, 1.0));
        Tape t1, t2;
        Tensor a = lora_forward(t1, base, ad, x);
        Tensor b = merged.apply(t2, x);
        for (int j = 0; j < 5; ++j) CHECK(std::fabs(a.at(0, j) - b.at(0, j)) <= 1e-5f);
    }

    // delta rank <= r via the singular-value oracle
    std::vector<float> delta(base.w.size());
    for (size_t i = 0; i < delta.size(); ++i)
        delta[i] = merged.w.values()[i] - base.w.values()[i];
    CHECK(tl::numerical_rank(delta, 5, 7) <= 2);

    // zero-B merge leaves W untouched
    LoRAAdapter zero = LoRAAdapter::make("lora.z", 7, 5, 2, 8.0f, rng);
    Linear same = merge(base, zero);
    CHECK(tu::bits_equal(same.w.values(), base.w.values()));
}

TEST_CASE("adapter construction validates rank and alpha") {
    Rng rng(5);
    CHECK(tu::throws_with([&] { LoRAAdapter::make("x", 4, 4, 5, 1.0f, rng); }, "rank"));
    CHECK(tu::throws_with([&] { LoRAAdapter::make("x", 4, 4, 2, -1.0f, rng); }, "alpha"));
}

TEST_CASE("resolve_trainable covers the full stage/profile grid") {
    auto names = [](const TrainableSet& s) { return s.open; };
    using S = std::set<std::string>;

    CHECK(names(resolve_trainable(Stage::PRETRAIN, Profile::BASE)) ==
          S{"qformer", "queries", "itm_head", "temperature"});
    CHECK(names(resolve_trainable(Stage::PRETRAIN, Profile::CHAT)) ==
          S{"qformer", "queries", "itm_head", "temperature"});
    CHECK(names(resolve_trainable(Stage::MULTITASK, Profile::BASE)) == S{"projection"});
    CHECK(names(resolve_trainable(Stage::MULTITASK, Profile::CHAT)) ==
          S{"projection", "lora_vision", "lora_decoder"});
    CHECK(names(resolve_trainable(Stage::SCENE_AWARE, Profile::BASE)) ==
          S{"qformer", "queries", "projection"});
    CHECK(names(resolve_trainable(Stage::SCENE_AWARE, Profile::CHAT)) ==
          S{"qformer", "queries", "projection", "lora_vision", "lora_decoder"});

    // config switch restricting adapters to the scene-aware stage
    CHECK(names(resolve_trainable(Stage::MULTITASK, Profile::CHAT, false)) == S{"projection"});
}

TEST_CASE("apply_trainable marks exactly the open groups") {
    Model m = Model::build(tiny_config(), Profile::CHAT, 6, tiny_lora());
    apply_trainable(m, resolve_trainable(Stage::MULTITASK, Profile::CHAT));
    for (Param* p : m.parameters()) {
        ParamGroup g = group_of(p->name);
        bool want = g == ParamGroup::Projection || g == ParamGroup::LoraVision ||
                    g == ParamGroup::LoraDecoder;
        CHECK(p->requires_grad() == want);
    }
}

TEST_CASE("fresh adapters change no model output") {
    QFormerConfig cfg = tiny_config();
    Model plain = Model::build(cfg, Profile::BASE, 7);
    Model chat = Model::build(cfg, Profile::CHAT, 7, tiny_lora());
    // Base weights come from the same seed; adapters draw extra randomness
    // for A but B = 0 keeps every forward identical.
    Rng rng(70);
    Tensor img({cfg.image_patches, cfg.image_feat_dim},
               tu::random_values(static_cast<size_t>(cfg.image_patches) * cfg.image_feat_dim, rng,
                                 1.0));
    std::vector<int> text = {kBos, 4, 5, kEos};
    Tape t1, t2;
    Tensor a = plain.forward(t1, img, &text, MaskMode::ITM).query_states;
    Tensor b = chat.forward(t2, img, &text, MaskMode::ITM).query_states;
    CHECK(tu::bits_equal(a.values(), b.values()));

    Tensor prefix({cfg.num_queries, cfg.decoder_dim},
                  tu::random_values(static_cast<size_t>(cfg.num_queries) * cfg.decoder_dim, rng,
                                    1.0));
    Tape t3, t4;
    Tensor la = plain.decode(t3, prefix, text);
    Tensor lb = chat.decode(t4, prefix, text);
    CHECK(tu::bits_equal(la.values(), lb.values()));
}

TEST_CASE("group_of covers every model parameter") {
    Model m = Model::build(tiny_config(), Profile::CHAT, 8, tiny_lora());
    for (Param* p : m.parameters()) CHECK_NOTHROW(group_of(p->name));
    CHECK(group_of("queries.table") == ParamGroup::Queries);
    CHECK(group_of("lora.decoder.layer0.q.a") == ParamGroup::LoraDecoder);
    CHECK(tu::throws_with([] { group_of("mystery.w"); }, "no known group"));
}
