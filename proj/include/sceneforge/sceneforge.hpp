#pragma once

#include "sceneforge/asts.hpp"
#include "sceneforge/common.hpp"
#include "sceneforge/corpus.hpp"
#include "sceneforge/evaluation.hpp"
#include "sceneforge/features.hpp"
#include "sceneforge/grounding.hpp"
#include "sceneforge/layout.hpp"
#include "sceneforge/learner.hpp"
#include "sceneforge/scene_template.hpp"
#include "sceneforge/synthetic.hpp"
#include "sceneforge/textproc.hpp"
