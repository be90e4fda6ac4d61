//! Non-crossing partitions and admissible contraction walks.

mod partitions;
mod walks;

pub use partitions::{
    block_type_table, count_even_block_nc, enumerate_nc, for_each_nc_labels, BlockTypeTable,
    NonCrossingPartition, MAX_NC_SIZE,
};
pub use walks::{
    count_paths, enumerate_paths, enumerate_paths_with, enumerate_positive_paths,
    enumerate_positive_paths_with, path_to_walk, walk_to_path, ContractionPath, Walk, MAX_L, MAX_Q,
};
