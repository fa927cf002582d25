//! Persistence and report artifacts.

mod archive;
mod svg;
mod table;

pub use archive::{
    decode_eig, decode_field, encode_eig, encode_field, load_eig, load_field, read_header, save_eig, save_eig_stamped,
    save_field, ArchiveHeader, ArchiveKind, ARCHIVE_VERSION,
};
pub use svg::{emit_svg, render_svg, Axes, Scale, Series};
pub use table::{
    decay_table, diophantine_table, eigenvalues_table, format_real, parse_real, read_csv, smalldiv_table, solve_table,
    weyl_table, write_csv, CsvTable, INFINITY, RESONANT,
};
