#pragma once

#include <map>
#include <set>
#include <string>

#include "zv/model.hpp"

namespace zv {

enum class Stage { PRETRAIN, MULTITASK, SCENE_AWARE };

const char* stage_name(Stage s);
Stage parse_stage(const std::string& s);

enum class ParamGroup {
    Queries,
    QFormer,
    ItmHead,
    Temperature,
    Projection,
    VisionBase,
    DecoderBase,
    LoraVision,
    LoraDecoder,
};

const char* group_name(ParamGroup g);
ParamGroup group_of(const std::string& param_name);

// Which parameter groups receive gradients in a given stage/profile. The
// image-feature transform and the decoder stand-in stay frozen everywhere;
// Chat opens their adapters instead.
struct TrainableSet {
    Stage stage;
    Profile profile;
    std::set<std::string> open;

    bool contains(ParamGroup g) const { return open.count(group_name(g)) > 0; }
};

// lora_in_multitask=false restricts adapter training to the scene-aware
// stage for the Chat profile.
TrainableSet resolve_trainable(Stage stage, Profile profile, bool lora_in_multitask = true);

// Marks frozen parameters detached for the optimizer.
void apply_trainable(Model& model, const TrainableSet& set);

uint64_t group_hash(const Model& model, ParamGroup g);
std::map<std::string, uint64_t> all_group_hashes(const Model& model);

}  // namespace zv
