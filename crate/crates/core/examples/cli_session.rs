//! Drives the command-line front end in-process against a scratch directory.

use latticekb::kbio::cli;
use latticekb::kbio::fixture::LBP_EVIDENCE;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let evidence = dir.path().join("lbp.evidence");
    std::fs::write(&evidence, LBP_EVIDENCE)?;
    let evidence = evidence.to_str().unwrap();
    let kb = dir.path().join("lbp.kb");
    let kb = kb.to_str().unwrap();

    let session: [&[&str]; 6] = [
        &["build", evidence, "-o", kb, "--round2"],
        &["approx", kb, "--disease", "PIVD"],
        &["rules", kb],
        &["set-decision", kb, "--label", "101", "--disease", "PIVD", "--vd", "2"],
        &["check", kb],
        &["approx", kb, "--disease", "NOPE"],
    ];
    for args in session {
        println!("$ latticekb {}", args.join(" ").replace(dir.path().to_str().unwrap(), "."));
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = cli::run(std::iter::once("latticekb").chain(args.iter().copied()), &mut out, &mut err);
        print!("{}{}", String::from_utf8(out)?, String::from_utf8(err)?);
        println!("[exit {code}]\n");
    }
    Ok(())
}
