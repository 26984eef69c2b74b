#pragma once

#include "topseg/bilstm.hpp"
#include "topseg/checkpoint.hpp"
#include "topseg/cli.hpp"
#include "topseg/common.hpp"
#include "topseg/config.hpp"
#include "topseg/corpus.hpp"
#include "topseg/cross_segment.hpp"
#include "topseg/evaluation.hpp"
#include "topseg/grad_check.hpp"
#include "topseg/graph.hpp"
#include "topseg/grid.hpp"
#include "topseg/losses.hpp"
#include "topseg/model_factory.hpp"
#include "topseg/optimizer.hpp"
#include "topseg/rng.hpp"
#include "topseg/segmenter.hpp"
#include "topseg/synth.hpp"
#include "topseg/tensor.hpp"
#include "topseg/text.hpp"
#include "topseg/training.hpp"
#include "topseg/wordpiece.hpp"
