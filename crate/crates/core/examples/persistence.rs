//! Evidence documents and built knowledge bases both round-trip through text.

use latticekb::kbio::fixture::LBP_EVIDENCE;
use latticekb::kbio::{build_from_document, load_kb, parse_evidence, render_evidence, serialize_kb, BuildSettings};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let doc = parse_evidence(LBP_EVIDENCE)?;
    let canonical = render_evidence(&doc);
    assert_eq!(parse_evidence(&canonical)?, doc);
    println!("evidence document: {} facts, {} records", doc.facts.len(), doc.evidence.len());

    let kb = build_from_document(&doc, BuildSettings::default())?;
    let text = serialize_kb(&kb);
    let restored = load_kb(&text)?;
    assert_eq!(restored, kb);
    assert_eq!(serialize_kb(&restored), text);
    println!("serialized KB: {} lines, reloads identically\n", text.lines().count());
    for line in text.lines().take(12) {
        println!("{line}");
    }

    match parse_evidence("module M\nfact f1 \"a\" \"yes\"\nevidence f1 D m=4 level=1 count=1\n") {
        Ok(_) => println!("\nunexpectedly parsed"),
        Err(e) => println!("\nrejected bad document: {e}"),
    }
    Ok(())
}
