#include "zv/trainable.hpp"

namespace zv {

const char* stage_name(Stage s) {
    switch (s) {
        case Stage::PRETRAIN: return "pretrain";
        case Stage::MULTITASK: return "multitask";
        case Stage::SCENE_AWARE: return "scene";
    }
    return "?";
}

Stage parse_stage(const std::string& s) {
    if (s == "pretrain") return Stage::PRETRAIN;
    if (s == "multitask") return Stage::MULTITASK;
    if (s == "scene") return Stage::SCENE_AWARE;
    fail("unknown stage '{}', expected pretrain, multitask or scene", s);
}

const char* group_name(ParamGroup g) {
    switch (g) {
        case ParamGroup::Queries: return "queries";
        case ParamGroup::QFormer: return "qformer";
        case ParamGroup::ItmHead: return "itm_head";
        case ParamGroup::Temperature: return "temperature";
        case ParamGroup::Projection: return "projection";
        case ParamGroup::VisionBase: return "vision_base";
        case ParamGroup::DecoderBase: return "decoder_base";
        case ParamGroup::LoraVision: return "lora_vision";
        case ParamGroup::LoraDecoder: return "lora_decoder";
    }
    return "?";
}

ParamGroup group_of(const std::string& name) {
    auto has_prefix = [&](const char* p) { return name.rfind(p, 0) == 0; };
    if (has_prefix("queries.")) return ParamGroup::Queries;
    if (has_prefix("qformer.")) return ParamGroup::QFormer;
    if (has_prefix("itm_head.")) return ParamGroup::ItmHead;
    if (has_prefix("temperature")) return ParamGroup::Temperature;
    if (has_prefix("projection.")) return ParamGroup::Projection;
    if (has_prefix("vision.")) return ParamGroup::VisionBase;
    if (has_prefix("decoder.")) return ParamGroup::DecoderBase;
    if (has_prefix("lora.vision")) return ParamGroup::LoraVision;
    if (has_prefix("lora.decoder")) return ParamGroup::LoraDecoder;
    fail("parameter '{}' belongs to no known group", name);
}

TrainableSet resolve_trainable(Stage stage, Profile profile, bool lora_in_multitask) {
    TrainableSet set;
    set.stage = stage;
    set.profile = profile;
    auto open = [&](ParamGroup g) { set.open.insert(group_name(g)); };
    switch (stage) {
        case Stage::PRETRAIN:
            open(ParamGroup::QFormer);
            open(ParamGroup::Queries);
            open(ParamGroup::ItmHead);
            open(ParamGroup::Temperature);
            break;
        case Stage::MULTITASK:
            open(ParamGroup::Projection);
            if (profile == Profile::CHAT && lora_in_multitask) {
                open(ParamGroup::LoraVision);
                open(ParamGroup::LoraDecoder);
            }
            break;
        case Stage::SCENE_AWARE:
            open(ParamGroup::QFormer);
            open(ParamGroup::Queries);
            open(ParamGroup::Projection);
            if (profile == Profile::CHAT) {
                open(ParamGroup::LoraVision);
                open(ParamGroup::LoraDecoder);
            }
            break;
    }
    return set;
}

void apply_trainable(Model& model, const TrainableSet& set) {
    for (Param* p : model.parameters()) {
        p->set_requires_grad(set.contains(group_of(p->name)));
    }
}

uint64_t group_hash(const Model& model, ParamGroup g) {
    uint64_t h = kFnvOffset;
    for (const Param* p : model.parameters()) {
        if (group_of(p->name) != g) continue;
        h = fnv1a64(p->name, h);
        h = fnv1a64_bytes(p->values().data(), p->values().size() * sizeof(float), h);
    }
    return h;
}

std::map<std::string, uint64_t> all_group_hashes(const Model& model) {
    std::map<std::string, uint64_t> out;
    for (ParamGroup g :
         {ParamGroup::Queries, ParamGroup::QFormer, ParamGroup::ItmHead, ParamGroup::Temperature,
          ParamGroup::Projection, ParamGroup::VisionBase, ParamGroup::DecoderBase,
          ParamGroup::LoraVision, ParamGroup::LoraDecoder}) {
        out[group_name(g)] = group_hash(model, g);
    }
    return out;
}

}  // namespace zv
