use std::process::Command;

/// Embeds a build identifier so result meta files can name the exact tree
/// they were produced from. Falls back to "unknown" outside a git checkout.
fn main() {
    let describe = Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|out| out.status.success())
        .map(|out| String::from_utf8_lossy(&out.stdout).trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".to_string());
    println!("cargo:rustc-env=DSKLINK_GIT_DESCRIBE={describe}");
}
