#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "zv/model.hpp"
#include "zv/tokens.hpp"
#include "zv/trainable.hpp"

#include "support/finite_diff.hpp"
#include "support/ref_model.hpp"
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
    c.cross_attention_period = 2;
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

Tensor random_image(const QFormerConfig& cfg, Rng& rng) {
    return Tensor({cfg.image_patches, cfg.image_feat_dim},
                  tu::random_values(static_cast<size_t>(cfg.image_patches) * cfg.image_feat_dim,
                                    rng, 1.0));
}

std::vector<Param*> open_params(Model& m) {
    std::vector<Param*> out;
    for (Param* p : m.parameters())
        if (p->requires_grad()) out.push_back(p);
    return out;
}

}  // namespace

TEST_CASE("query compression contract across image sizes") {
    for (int patches : {4, 64, 256}) {
        QFormerConfig cfg = tiny_config();
        cfg.image_patches = patches;
        Model m = Model::build(cfg, Profile::BASE, 1);
        Rng rng(patches);
        Tape t;
        QFormerOutput out = m.forward(t, random_image(cfg, rng), nullptr, MaskMode::ITM);
        CHECK(out.query_states.rows() == cfg.num_queries);
        CHECK(out.query_states.cols() == cfg.hidden_dim);
        CHECK(!out.text_states.defined());
    }
}

TEST_CASE("full-scale shape instantiates and forwards: 256x768 features to 64 queries") {
    QFormerConfig cfg;
    cfg.num_queries = 64;
    cfg.hidden_dim = 64;
    cfg.num_layers = 2;
    cfg.num_heads = 8;
    cfg.image_patches = 256;
    cfg.image_feat_dim = 768;
    cfg.decoder_dim = 64;
    cfg.decoder_heads = 8;
    Model m = Model::build(cfg, Profile::BASE, 2);
    Rng rng(2);
    Tape t;
    QFormerOutput out = m.forward(t, random_image(cfg, rng), nullptr, MaskMode::ITM);
    CHECK(out.query_states.rows() == 64);
    CHECK(out.query_states.cols() == cfg.hidden_dim);
}

TEST_CASE("image shape mismatch and overlong text are rejected") {
    QFormerConfig cfg = tiny_config();
    Model m = Model::build(cfg, Profile::BASE, 3);
    Tape t;
    CHECK(tu::throws_with([&] { m.forward(t, Tensor::zeros({2, 5}), nullptr, MaskMode::ITM); },
                          "image features"));
    std::vector<int> text(static_cast<size_t>(cfg.max_text_len) + 1, 3);
    Rng rng(3);
    Tensor img = random_image(cfg, rng);
    CHECK(tu::throws_with([&] { m.forward(t, img, &text, MaskMode::ITM); }, "max_text_len"));
    std::vector<int> bad = {cfg.vocab_size};
    CHECK(tu::throws_with([&] { m.forward(t, img, &bad, MaskMode::ITM); }, "unknown token id"));
}

TEST_CASE("ITC text invisibility: query states bit-identical with and without text") {
    QFormerConfig cfg = tiny_config();
    for (uint64_t seed = 0; seed < 5; ++seed) {
        Model m = Model::build(cfg, Profile::BASE, seed);
        Rng rng(seed + 100);
        Tensor img = random_image(cfg, rng);
        std::vector<int> text = {kBos, 4, 5, kEos};

        Tape t1, t2;
        QFormerOutput with = m.forward(t1, img, &text, MaskMode::ITC);
        QFormerOutput without = m.forward(t2, img, nullptr, MaskMode::ITC);
        CHECK(tu::bits_equal(with.query_states.values(), without.query_states.values()));
    }
}

TEST_CASE("ITM text visibility changes query states") {
    QFormerConfig cfg = tiny_config();
    Model m = Model::build(cfg, Profile::BASE, 11);
    Rng rng(11);
    Tensor img = random_image(cfg, rng);
    std::vector<int> text = {kBos, 4, 5, kEos};

    Tape t1, t2;
    Tensor itc = m.forward(t1, img, &text, MaskMode::ITC).query_states;
    Tensor itm = m.forward(t2, img, &text, MaskMode::ITM).query_states;
    float max_abs = 0.0f;
    for (size_t i = 0; i < itc.size(); ++i)
        max_abs = std::max(max_abs, std::fabs(itc.values()[i] - itm.values()[i]));
    CHECK(max_abs > 1e-6f);
}

TEST_CASE("ITG text states are causal") {
    QFormerConfig cfg = tiny_config();
    Model m = Model::build(cfg, Profile::BASE, 13);
    Rng rng(13);
    Tensor img = random_image(cfg, rng);
    std::vector<int> a = {kBos, 4, 5, 6, kEos};
    std::vector<int> b = {kBos, 4, 5, 9, 10};  // diverges after position 2

    Tape t1, t2;
    Tensor sa = m.forward(t1, img, &a, MaskMode::ITG).text_states;
    Tensor sb = m.forward(t2, img, &b, MaskMode::ITG).text_states;
    for (int pos = 0; pos <= 2; ++pos)
        for (int c = 0; c < cfg.hidden_dim; ++c) CHECK(sa.at(pos, c) == sb.at(pos, c));
    float diff = 0.0f;
    for (int c = 0; c < cfg.hidden_dim; ++c)
        diff = std::max(diff, std::fabs(sa.at(3, c) - sb.at(3, c)));
    CHECK(diff > 0.0f);
}

TEST_CASE("forward_instructed") {
    QFormerConfig cfg = tiny_config();
    Model m = Model::build(cfg, Profile::CHAT, 17, tiny_lora());
    Rng rng(17);
    Tensor img = random_image(cfg, rng);

    Tape t;
    std::vector<int> empty;
    CHECK(tu::throws_with([&] { m.forward_instructed(t, img, empty); }, "forward()"));

    // different instructions extract different features
    std::vector<int> instr1 = {4, 5, 6};
    std::vector<int> instr2 = {7, 8, 9};
    Tape ta, tb;
    Tensor qa = m.forward_instructed(ta, img, instr1).query_states;
    Tensor qb = m.forward_instructed(tb, img, instr2).query_states;
    float max_abs = 0.0f;
    for (size_t i = 0; i < qa.size(); ++i)
        max_abs = std::max(max_abs, std::fabs(qa.values()[i] - qb.values()[i]));
    CHECK(max_abs > 1e-6f);
    CHECK(qa.rows() == cfg.num_queries);

    // a pad-only instruction is definitionally a plain ITM forward
    std::vector<int> pad = {kPad};
    Tape tc, td;
    Tensor qp = m.forward_instructed(tc, img, pad).query_states;
    Tensor qi = m.forward(td, img, &pad, MaskMode::ITM).query_states;
    CHECK(tu::bits_equal(qp.values(), qi.values()));
}

TEST_CASE("project_queries identity and zero maps") {
    Rng rng(19);
    Linear fc = Linear::identity("projection.fc", 6);
    Tensor qs({3, 6}, tu::random_values(18, rng, 1.0));
    Tape t;
    Tensor out = project_queries(t, fc, qs);
    CHECK(tu::bits_equal(out.values(), qs.values()));

    Linear zero = Linear::make("projection.zero", 6, 4, rng);
    zero.w.values().assign(zero.w.size(), 0.0f);
    Tensor z = project_queries(t, zero, qs);
    for (float v : z.values()) CHECK(v == 0.0f);
    CHECK(z.rows() == 3);

    CHECK(tu::throws_with([&] { project_queries(t, fc, Tensor::zeros({2, 5})); }, "projection"));
}

TEST_CASE("decode causality and edges") {
    QFormerConfig cfg = tiny_config();
    Model m = Model::build(cfg, Profile::BASE, 23);
    Rng rng(23);
    Tensor prefix({cfg.num_queries, cfg.decoder_dim},
                  tu::random_values(static_cast<size_t>(cfg.num_queries) * cfg.decoder_dim, rng,
                                    1.0));

    std::vector<int> toks = {kBos, 4, 5, 6};
    std::vector<int> perturbed = {kBos, 4, 5, 9};  // differs at position 3
    Tape t1, t2;
    Tensor la = m.decode(t1, prefix, toks);
    Tensor lb = m.decode(t2, prefix, perturbed);
    REQUIRE(la.rows() == 4);
    for (int pos = 0; pos <= 2; ++pos)
        for (int c = 0; c < cfg.vocab_size; ++c) CHECK(la.at(pos, c) == lb.at(pos, c));

    // perturbing any prefix row changes the logits at position 0
    Tensor prefix2 = prefix.detached();
    prefix2.data()->values[3] += 0.5f;
    Tape t3;
    Tensor lc = m.decode(t3, prefix2, toks);
    float diff = 0.0f;
    for (int c = 0; c < cfg.vocab_size; ++c)
        diff = std::max(diff, std::fabs(la.at(0, c) - lc.at(0, c)));
    CHECK(diff > 0.0f);

    Tape t4;
    Tensor empty = m.decode(t4, prefix, {});
    CHECK(empty.shape() == std::vector<int>{0, cfg.vocab_size});

    Tape t5;
    std::vector<int> bad = {cfg.vocab_size + 1};
    CHECK(tu::throws_with([&] { m.decode(t5, prefix, bad); }, "unknown token id"));
}

TEST_CASE("forward is deterministic for a fixed seed") {
    QFormerConfig cfg = tiny_config();
    std::vector<int> text = {kBos, 4, 5, kEos};
    auto run = [&] {
        Model m = Model::build(cfg, Profile::CHAT, 29, tiny_lora());
        Rng rng(29);
        Tensor img = random_image(cfg, rng);
        Tape t;
        QFormerOutput out = m.forward(t, img, &text, MaskMode::ITG);
        std::vector<float> all = out.query_states.values();
        auto lm = out.lm_logits.values();
        all.insert(all.end(), lm.begin(), lm.end());
        return all;
    };
    CHECK(tu::bits_equal(run(), run()));
}

TEST_CASE("composite transformer block: every open parameter passes finite differences") {
    QFormerConfig cfg = tiny_config();
    Model m = Model::build(cfg, Profile::BASE, 31);
    Rng rng(31);
    Tensor img = random_image(cfg, rng);
    std::vector<int> caption = {4, 5, 6, kEos};
    std::vector<int> text = {kBos, 4, 5, 6, kEos};
    std::vector<int> targets = {4, 5, 6, kEos, -1};

    Tape t;
    QFormerOutput out = m.forward(t, img, &text, MaskMode::ITG);
    t.backward(cross_entropy(out.lm_logits, targets, -1));

    auto eval = [&] {
        ref::Mat h = refm::qformer_hidden(m, refm::image_of_tensor(img), &text, MaskMode::ITG);
        ref::Mat states = ref::slice_rows(h, cfg.num_queries, static_cast<int>(text.size()));
        return ref::cross_entropy(refm::linear(m.lm_head, states), targets, -1);
    };
    auto res = fd::check_params(open_params(m), eval, 1e-4, 1e-3, 1e-4);
    CHECK_MESSAGE(res.ok(), res.worst, " rel=", res.max_rel, " a=", res.worst_analytic, " n=", res.worst_numeric);
}

TEST_CASE("projection gradient through the decoder loss passes finite differences") {
    QFormerConfig cfg = tiny_config();
    Model m = Model::build(cfg, Profile::CHAT, 37, tiny_lora());
    Rng rng(37);
    Tensor img = random_image(cfg, rng);
    std::vector<int> instr = {4, 5};
    std::vector<int> seq = {kBos, 6, 7, kEos};
    std::vector<int> targets = {6, 7, kEos, -1};

    // Only the projection and the adapters are differentiated here, matching
    // the multitask trainable surface.
    for (Param* p : m.parameters()) {
        ParamGroup g = group_of(p->name);
        p->set_requires_grad(g == ParamGroup::Projection || g == ParamGroup::LoraVision ||
                             g == ParamGroup::LoraDecoder);
    }

    Tape t;
    Tensor prefix = m.extract_visual_prefix(t, img, &instr);
    Tensor logits = m.decode(t, prefix, seq);
    t.backward(cross_entropy(logits, targets, -1));

    auto eval = [&] {
        ref::Mat h = refm::qformer_hidden(m, refm::image_of_tensor(img), &instr,
                                          MaskMode::INSTRUCTION);
        ref::Mat qs = ref::slice_rows(h, 0, cfg.num_queries);
        ref::Mat prefix64 = refm::linear(m.projection, qs);
        ref::Mat logits64 = refm::decoder_logits(m, prefix64, seq);
        return ref::cross_entropy(logits64, targets, -1);
    };
    auto res = fd::check_params(open_params(m), eval, 1e-4, 1e-3, 1e-4);
    CHECK_MESSAGE(res.ok(), res.worst, " rel=", res.max_rel, " a=", res.worst_analytic, " n=", res.worst_numeric);
}
