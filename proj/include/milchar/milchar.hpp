#pragma once

#include "milchar/classifiers.hpp"
#include "milchar/data.hpp"
#include "milchar/distance.hpp"
#include "milchar/embedding.hpp"
#include "milchar/error.hpp"
#include "milchar/evaluation.hpp"
#include "milchar/linalg.hpp"
#include "milchar/logistic.hpp"
#include "milchar/optim.hpp"
#include "milchar/pipeline.hpp"
#include "milchar/rng.hpp"
#include "milchar/roc.hpp"
#include "milchar/synth.hpp"
#include "milchar/text.hpp"
