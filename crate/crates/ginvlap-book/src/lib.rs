//! Doc-tested chapters of the ginvlap guide.
//!
//! Each module embeds one chapter of the book in `book/src`, so `cargo test`
//! compiles and runs every code snippet the guide shows.
